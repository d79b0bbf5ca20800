#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "markiter/config.hpp"
#include "markiter/errors.hpp"
#include "markiter/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  int grid = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)");
  cmd->add_option("--preset", args.preset, "named preset instead of a config file");
  cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "master seed override")->each([&](const std::string&) {
    args.seed_set = true;
  });
  cmd->add_option("--jobs", args.jobs, "worker count for trial loops");
  cmd->add_option("--grid", args.grid, "grid size override");
}

markiter::ExperimentConfig load_config(const CommonArgs& args) {
  markiter::ExperimentConfig cfg = [&] {
    if (!args.config_path.empty()) return markiter::ExperimentConfig::from_file(args.config_path);
    if (!args.preset.empty()) return markiter::ExperimentConfig::preset(args.preset);
    throw markiter::ConfigError("pass --config PATH or --preset NAME (presets: " + [] {
      std::string names;
      for (const auto& n : markiter::ExperimentConfig::preset_names()) {
        if (!names.empty()) names += ", ";
        names += n;
      }
      return names;
    }() + ")");
  }();
  if (args.seed_set) cfg.override_seed(args.seed);
  if (const char* env = std::getenv("MARKITER_SEED")) {
    const std::uint64_t s = std::strtoull(env, nullptr, 10);
    std::cerr << "WARNING: seed overridden by MARKITER_SEED=" << s << "\n";
    cfg.override_seed(s);
  }
  if (args.grid > 0) cfg.override_grid(args.grid);
  if (args.jobs > 0) cfg.override_jobs(args.jobs);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-driven random iterations of circle maps: stationary/invariant measure "
               "solvers, duality checks, and synchronization experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  bool dump_orbit = false;

  CLI::App* solve = app.add_subcommand("solve", "solve for a stationary measure of the skew chain");
  CLI::App* correspond = app.add_subcommand("correspond", "map the stationary measure to its invariant partner and verify the round trip");
  CLI::App* verify = app.add_subcommand("verify-lemmas", "run the full identity/bound battery and print a pass/fail table");
  CLI::App* sync = app.add_subcommand("sync", "estimate contraction exponents and the local synchronization fraction");
  CLI::App* scan = app.add_subcommand("scan", "scan start points for a uniform negative exponent bound");
  for (CLI::App* cmd : {solve, correspond, verify, sync, scan}) add_common(cmd, args);
  sync->add_flag("--dump-orbit", dump_orbit, "write the first trial's orbit as CSV (large)");

  CLI11_PARSE(app, argc, argv);

  try {
    const markiter::ExperimentConfig cfg = load_config(args);
    markiter::RunOutcome outcome;
    if (solve->parsed()) outcome = markiter::run_solve(cfg, args.out_dir);
    if (correspond->parsed()) outcome = markiter::run_correspond(cfg, args.out_dir);
    if (verify->parsed()) outcome = markiter::run_verify(cfg, args.out_dir);
    if (sync->parsed()) outcome = markiter::run_sync(cfg, args.out_dir, dump_orbit);
    if (scan->parsed()) outcome = markiter::run_scan(cfg, args.out_dir);
    for (const auto& f : outcome.files_written) std::cout << "wrote " << f << "\n";
    return outcome.exit_code;
  } catch (const markiter::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
