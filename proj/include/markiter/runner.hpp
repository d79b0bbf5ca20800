#pragma once

#include <optional>
#include <string>
#include <vector>

#include "markiter/config.hpp"
#include "markiter/correspondence.hpp"
#include "markiter/measure.hpp"
#include "markiter/sync.hpp"

namespace markiter {

struct VerifyRow {
  std::string statement_id;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;  // e.g. "hypothesis-violated"
};

// The lemma/theorem battery over one configured instance: duality and its
// involution, the two operator forms, fixed-point stationarity, the
// correspondence round trips, the sandwich bounds, shift duality, the
// conditional lower bound, and a short synchronization run. Failures are
// rows, not errors. `corrupt_dual` replaces the dual kernel with a broken
// one (negative-control path).
std::vector<VerifyRow> verify_battery(const ExperimentConfig& cfg,
                                      const std::optional<FiniteKernel>& corrupt_dual = {});

// Smallest bin-union closed under the image covers of every map, if any
// nontrivial one exists. Such a set is forward-invariant at grid resolution
// and seeds a valid indicator for the conditional-bound check.
std::optional<std::vector<int>> find_absorbing_bins(const MapFamily& family, int grid_n);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> files_written;
};

RunOutcome run_solve(const ExperimentConfig& cfg, const std::string& out_dir);
RunOutcome run_correspond(const ExperimentConfig& cfg, const std::string& out_dir);
RunOutcome run_verify(const ExperimentConfig& cfg, const std::string& out_dir);
RunOutcome run_sync(const ExperimentConfig& cfg, const std::string& out_dir, bool dump_orbit = false);
RunOutcome run_scan(const ExperimentConfig& cfg, const std::string& out_dir);

nlohmann::json report_to_json(const ContractionReport& report);

}  // namespace markiter
