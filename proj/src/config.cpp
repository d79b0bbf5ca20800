#include "markiter/config.hpp"

#include <cmath>
#include <fstream>

#include "markiter/errors.hpp"
#include "markiter/io.hpp"

namespace markiter {

namespace {

using nlohmann::json;

double require_number(const json& doc, const std::string& key, double fallback, bool required) {
  if (!doc.contains(key)) {
    if (required) throw ConfigError("config." + key + ": required");
    return fallback;
  }
  if (!doc[key].is_number()) throw ConfigError("config." + key + ": must be a number");
  return doc[key].get<double>();
}

json kernel_spec_from_rows(const std::vector<std::vector<double>>& rows) {
  json spec;
  spec["rows"] = rows;
  return spec;
}

std::vector<std::vector<double>> rows_from_kernel_spec(const json& spec) {
  if (spec.contains("rows")) {
    if (!spec["rows"].is_array()) throw ConfigError("config.kernel.rows: must be an array of rows");
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < spec["rows"].size(); ++i) {
      const auto& r = spec["rows"][i];
      if (!r.is_array()) throw ConfigError("config.kernel.rows[" + std::to_string(i) + "]: must be an array");
      rows.push_back(r.get<std::vector<double>>());
    }
    return rows;
  }
  if (spec.contains("circulant")) {
    const auto w = spec["circulant"].get<std::vector<double>>();
    const int k = static_cast<int>(w.size());
    double sum = 0.0;
    for (double v : w) {
      if (v < 0.0) throw ConfigError("config.kernel.circulant: negative weight");
      sum += v;
    }
    if (!(sum > 0.0)) throw ConfigError("config.kernel.circulant: zero total weight");
    std::vector<std::vector<double>> rows(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(k)));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        rows[static_cast<size_t>(i)][static_cast<size_t>(j)] = w[static_cast<size_t>((j - i + k) % k)] / sum;
    return rows;
  }
  if (spec.contains("file")) {
    const FiniteKernel kern = FiniteKernel::from_text_file(spec["file"].get<std::string>());
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < kern.size(); ++i) rows.push_back(kern.row(i));
    return rows;
  }
  throw ConfigError("config.kernel: needs one of rows | circulant | file");
}

CircleMap map_from_spec(const json& spec, size_t index) {
  const std::string where = "config.maps[" + std::to_string(index) + "]";
  if (!spec.contains("type")) throw ConfigError(where + ".type: required");
  const std::string type = spec["type"].get<std::string>();
  try {
    if (type == "rotation") return CircleMap::rotation(spec.at("angle").get<double>());
    if (type == "projective") {
      const auto m = spec.at("matrix").get<std::vector<std::vector<double>>>();
      if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2)
        throw ConfigError(where + ".matrix: must be 2x2");
      return CircleMap::projective({{{m[0][0], m[0][1]}, {m[1][0], m[1][1]}}});
    }
    if (type == "piecewise_linear")
      return CircleMap::piecewise_linear(spec.at("breaks").get<std::vector<double>>(),
                                         spec.at("images").get<std::vector<double>>());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ".type: unknown variant '" + type + "'");
}

json preset_doc(const std::string& name) {
  // Hyperbolic pair: diag(2, 1/2) with attractor/repeller at 0 and 1/2, and
  // its conjugate by a quarter-turn of the chart with fixed points at 1/4
  // and 3/4. Disjoint fixed-point pairs, so no common invariant measure.
  const json proj_a = {{"type", "projective"}, {"matrix", {{2.0, 0.0}, {0.0, 0.5}}}};
  const json proj_b = {{"type", "projective"}, {"matrix", {{1.25, 0.75}, {0.75, 1.25}}}};
  const json proj_c = {{"type", "projective"},
                       {"matrix", {{0.925, 0.9093266739736605}, {0.9093266739736605, 1.975}}}};
  json doc;
  doc["schema_version"] = 1;
  doc["seed"] = 20250809;
  doc["grid"] = 256;
  doc["tol"] = 1e-10;
  doc["max_iter"] = 20000;
  doc["trials"] = 200;
  doc["steps"] = 10000;
  doc["burn_in"] = 1000;
  doc["delta0"] = 0.125;
  doc["rungs"] = 7;
  doc["x0"] = 0.1;
  doc["scan_points"] = 32;
  doc["scan_trials"] = 50;
  doc["scan_steps"] = 2000;
  doc["jobs"] = 1;
  doc["sync_threshold"] = 0.9;
  doc["solver_init"] = "uniform";

  if (name == "projective-pair") {
    doc["kernel"] = {{"rows", {{0.9, 0.1}, {0.2, 0.8}}}};
    doc["maps"] = {proj_a, proj_b};
  } else if (name == "rotation-control") {
    doc["kernel"] = {{"rows", {{0.9, 0.1}, {0.2, 0.8}}}};
    doc["maps"] = {json{{"type", "rotation"}, {"angle", 0.377964473}},
                   json{{"type", "rotation"}, {"angle", 0.135623746}}};
  } else if (name == "iid-uniform") {
    doc["kernel"] = {{"rows", {{0.5, 0.5}, {0.5, 0.5}}}};
    doc["maps"] = {proj_a, proj_b};
  } else if (name == "finite-positive") {
    doc["kernel"] = {{"rows", {{0.5, 0.3, 0.2}, {0.25, 0.45, 0.3}, {0.3, 0.2, 0.5}}}};
    doc["maps"] = {proj_a, proj_b, proj_c};
  } else if (name == "random-walk-drive") {
    doc["kernel"] = {{"circulant", {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}}};
    json maps = json::array();
    for (int a = 0; a < 8; ++a) maps.push_back(json{{"type", "rotation"}, {"angle", a / 8.0}});
    doc["maps"] = maps;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  doc["preset"] = name;
  return doc;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc_in) {
  json doc = doc_in;
  if (doc.contains("preset")) {
    // preset supplies defaults, explicit keys override
    json base = preset_doc(doc["preset"].get<std::string>());
    for (auto it = doc.begin(); it != doc.end(); ++it) base[it.key()] = it.value();
    doc = std::move(base);
  }

  ExperimentConfig cfg;
  cfg.schema_version = static_cast<int>(require_number(doc, "schema_version", 1, false));
  if (cfg.schema_version != 1)
    throw ConfigError("config.schema_version: unsupported version " + std::to_string(cfg.schema_version));
  if (doc.contains("preset")) cfg.preset_name = doc["preset"].get<std::string>();

  if (!doc.contains("seed")) throw ConfigError("config.seed: required (no silent nondeterminism)");
  if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
    throw ConfigError("config.seed: must be an unsigned integer");
  cfg.seed = doc["seed"].get<std::uint64_t>();

  cfg.grid = static_cast<int>(require_number(doc, "grid", cfg.grid, false));
  if (cfg.grid < 2) throw ConfigError("config.grid: must be >= 2");
  cfg.tol = require_number(doc, "tol", cfg.tol, false);
  if (!(cfg.tol > 0.0)) throw ConfigError("config.tol: must be positive");
  cfg.max_iter = static_cast<long>(require_number(doc, "max_iter", static_cast<double>(cfg.max_iter), false));
  cfg.trials = static_cast<int>(require_number(doc, "trials", cfg.trials, false));
  cfg.steps = static_cast<long>(require_number(doc, "steps", static_cast<double>(cfg.steps), false));
  cfg.burn_in = static_cast<long>(require_number(doc, "burn_in", static_cast<double>(cfg.burn_in), false));
  if (cfg.burn_in >= cfg.steps) throw ConfigError("config.burn_in: must be < steps");
  cfg.delta0 = require_number(doc, "delta0", cfg.delta0, false);
  if (!(cfg.delta0 > 0.0 && cfg.delta0 <= 0.25))
    throw ConfigError("config.delta0: must lie in (0, 1/4]");
  cfg.rungs = static_cast<int>(require_number(doc, "rungs", cfg.rungs, false));
  if (cfg.rungs < 1) throw ConfigError("config.rungs: must be >= 1");
  cfg.x0 = require_number(doc, "x0", cfg.x0, false);
  cfg.scan_points = static_cast<int>(require_number(doc, "scan_points", cfg.scan_points, false));
  cfg.scan_trials = static_cast<int>(require_number(doc, "scan_trials", cfg.scan_trials, false));
  cfg.scan_steps = static_cast<long>(require_number(doc, "scan_steps", static_cast<double>(cfg.scan_steps), false));
  cfg.jobs = static_cast<int>(require_number(doc, "jobs", cfg.jobs, false));
  if (cfg.jobs < 1) throw ConfigError("config.jobs: must be >= 1");
  cfg.sync_threshold = require_number(doc, "sync_threshold", cfg.sync_threshold, false);
  if (doc.contains("solver_init")) {
    cfg.solver_init = doc["solver_init"].get<std::string>();
    if (cfg.solver_init != "uniform" && cfg.solver_init != "random" && cfg.solver_init != "point")
      throw ConfigError("config.solver_init: must be uniform | random | point");
  }

  if (!doc.contains("kernel")) throw ConfigError("config.kernel: required");
  cfg.kernel_rows_ = rows_from_kernel_spec(doc["kernel"]);
  if (!doc.contains("maps") || !doc["maps"].is_array() || doc["maps"].empty())
    throw ConfigError("config.maps: required non-empty array");
  cfg.maps_ = doc["maps"];
  if (cfg.maps_.size() != cfg.kernel_rows_.size())
    throw ConfigError("config.maps: " + std::to_string(cfg.maps_.size()) + " maps for a kernel of size " +
                      std::to_string(cfg.kernel_rows_.size()));

  // Build once to surface construction errors with config-level messages.
  cfg.build_kernel();
  cfg.build_family();
  cfg.rebuild_canonical();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(doc);
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  return from_json(preset_doc(name));
}

std::vector<std::string> ExperimentConfig::preset_names() {
  return {"projective-pair", "rotation-control", "iid-uniform", "finite-positive",
          "random-walk-drive"};
}

void ExperimentConfig::rebuild_canonical() {
  json doc;
  doc["schema_version"] = schema_version;
  if (!preset_name.empty()) doc["preset"] = preset_name;
  doc["kernel"] = kernel_spec_from_rows(kernel_rows_);
  doc["maps"] = maps_;
  doc["grid"] = grid;
  doc["tol"] = tol;
  doc["max_iter"] = max_iter;
  doc["trials"] = trials;
  doc["steps"] = steps;
  doc["burn_in"] = burn_in;
  doc["seed"] = seed;
  doc["delta0"] = delta0;
  doc["rungs"] = rungs;
  doc["x0"] = x0;
  doc["scan_points"] = scan_points;
  doc["scan_trials"] = scan_trials;
  doc["scan_steps"] = scan_steps;
  doc["jobs"] = jobs;
  doc["sync_threshold"] = sync_threshold;
  doc["solver_init"] = solver_init;
  canonical_ = std::move(doc);
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical_.dump()); }

FiniteKernel ExperimentConfig::build_kernel() const {
  try {
    return FiniteKernel(kernel_rows_);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config.kernel: ") + e.what());
  }
}

MapFamily ExperimentConfig::build_family() const {
  std::vector<CircleMap> maps;
  maps.reserve(maps_.size());
  for (size_t i = 0; i < maps_.size(); ++i) maps.push_back(map_from_spec(maps_[i], i));
  return MapFamily(std::move(maps));
}

void ExperimentConfig::override_seed(std::uint64_t s) {
  seed = s;
  rebuild_canonical();
}

void ExperimentConfig::override_grid(int n) {
  if (n < 2) throw ConfigError("config.grid: must be >= 2");
  grid = n;
  rebuild_canonical();
}

void ExperimentConfig::override_jobs(int j) {
  if (j < 1) throw ConfigError("config.jobs: must be >= 1");
  jobs = j;
  rebuild_canonical();
}

}  // namespace markiter
