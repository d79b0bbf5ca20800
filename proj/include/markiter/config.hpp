#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "markiter/circle.hpp"
#include "markiter/kernels.hpp"

namespace markiter {

// Experiment description: driving kernel, map family, grid, tolerances,
// trial budgets, seeds. A config is either written out explicitly or derived
// from a named preset; either way the fully expanded document is kept so its
// hash can be echoed into every output.
class ExperimentConfig {
 public:
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();

  // Fully expanded document (keys sorted by the JSON library); hashing this
  // string identifies the run.
  const nlohmann::json& canonical() const { return canonical_; }
  std::string hash() const;

  FiniteKernel build_kernel() const;
  MapFamily build_family() const;

  int schema_version = 1;
  std::string preset_name;  // empty when explicit
  int grid = 256;
  double tol = 1e-10;
  long max_iter = 20000;
  int trials = 200;
  long steps = 10000;
  long burn_in = 1000;
  std::uint64_t seed = 0;
  double delta0 = 0.125;
  int rungs = 7;
  double x0 = 0.1;
  int scan_points = 32;
  int scan_trials = 50;
  long scan_steps = 2000;
  int jobs = 1;
  double sync_threshold = 0.9;
  std::string solver_init = "uniform";  // uniform | random | point

  void override_seed(std::uint64_t s);
  void override_grid(int n);
  void override_jobs(int j);

 private:
  nlohmann::json canonical_;
  void rebuild_canonical();
  std::vector<std::vector<double>> kernel_rows_;
  nlohmann::json maps_;  // array of map specs
};

}  // namespace markiter
