#include "markiter/sync.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "markiter/errors.hpp"
#include "markiter/parallel.hpp"

namespace markiter {

namespace {

const double kLogQuarter = std::log(0.25);

// log-diameter traces of the arc ladder along one driving word; row j is the
// rung starting at length delta0 * 2^-j. All rungs share the start point x.
std::vector<std::vector<double>> ladder_trace(const MapFamily& family,
                                              const std::vector<int>& states, double x,
                                              double delta0, int rungs) {
  const long n = static_cast<long>(states.size());
  std::vector<double> loglen(static_cast<size_t>(rungs));
  for (int j = 0; j < rungs; ++j)
    loglen[static_cast<size_t>(j)] = std::log(delta0) + j * std::log(0.5);

  auto log_diam = [](double ll) {
    if (ll < -0.6931471805599453) return ll;  // len < 1/2, diameter = len
    const double len = std::exp(ll);
    return std::log(std::max(1.0 - len, 1e-300));
  };

  std::vector<std::vector<double>> trace(static_cast<size_t>(rungs),
                                         std::vector<double>(static_cast<size_t>(n) + 1));
  for (int j = 0; j < rungs; ++j) trace[static_cast<size_t>(j)][0] = log_diam(loglen[static_cast<size_t>(j)]);

  double cur = wrap_unit(x);
  for (long t = 0; t < n; ++t) {
    const CircleMap& f = family[states[static_cast<size_t>(t)]];
    for (int j = 0; j < rungs; ++j) {
      loglen[static_cast<size_t>(j)] += f.log_length_ratio(cur, loglen[static_cast<size_t>(j)]);
      if (loglen[static_cast<size_t>(j)] > 0.0) loglen[static_cast<size_t>(j)] = 0.0;  // length <= 1
      trace[static_cast<size_t>(j)][static_cast<size_t>(t) + 1] = log_diam(loglen[static_cast<size_t>(j)]);
    }
    cur = f.apply(CirclePoint(cur)).pos;
  }
  return trace;
}

// First step where the diameter reaches 1/4, or -1 if it never does.
long escape_step(const std::vector<double>& row) {
  for (size_t t = 0; t < row.size(); ++t)
    if (row[t] >= kLogQuarter) return static_cast<long>(t);
  return -1;
}

// Least-squares slope through (t, y_t), t = 0..n. Exact zero for a
// bit-constant series.
double ls_slope(const std::vector<double>& y) {
  const long n = static_cast<long>(y.size()) - 1;
  const double mid = static_cast<double>(n) / 2.0;
  double num = 0.0, den = 0.0;
  for (long t = 0; t <= n; ++t) {
    const double dt = static_cast<double>(t) - mid;
    num += dt * (y[static_cast<size_t>(t)] - y[0]);
    den += dt * dt;
  }
  return num / den;
}

struct TrialSlope {
  double slope = 0.0;
  bool blown = false;
};

TrialSlope slope_from_trace(const std::vector<std::vector<double>>& trace) {
  for (int j = static_cast<int>(trace.size()); j-- > 0;) {
    if (escape_step(trace[static_cast<size_t>(j)]) == -1)
      return TrialSlope{ls_slope(trace[static_cast<size_t>(j)]), false};
  }
  return TrialSlope{0.0, true};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Nearest-rank upper quantile.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  size_t idx = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
  if (idx > 0) --idx;
  if (idx >= n) idx = n - 1;
  return v[idx];
}

bool has_piecewise_linear(const MapFamily& family) {
  for (int a = 0; a < family.size(); ++a)
    if (family[a].kind() == CircleMap::Kind::PiecewiseLinear) return true;
  return false;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  return stream_for(master, index).next();
}

}  // namespace

double estimate_exponent(const MapFamily& family, const FiniteKernel& p, const ChainStart& start,
                         double x, double delta0, long n, std::uint64_t seed, int rungs) {
  if (!(delta0 > 0.0 && delta0 <= 0.25))
    throw std::invalid_argument("estimate_exponent: delta0 must lie in (0, 1/4]");
  if (n < 100) throw std::invalid_argument("estimate_exponent: need n >= 100");
  const auto states = sample_chain(p, start, n, seed);
  const auto trace = ladder_trace(family, states, x, delta0, rungs);
  const TrialSlope ts = slope_from_trace(trace);
  if (ts.blown) {
    std::vector<long> escapes;
    escapes.reserve(trace.size());
    for (const auto& row : trace) escapes.push_back(escape_step(row));
    throw AllLaddersBlewUp("estimate_exponent: every rung exceeded diameter 1/4", std::move(escapes));
  }
  return ts.slope;
}

ContractionReport local_sync_experiment(const MapFamily& family, const FiniteKernel& p,
                                        const StationaryVector& m, double x, int trials, long n,
                                        std::uint64_t seed, const SyncOptions& opts) {
  ContractionReport report;
  report.trials = trials;
  report.steps = n;
  report.delta0 = opts.ladder.delta0;
  report.rungs = opts.ladder.rungs;
  report.x0 = wrap_unit(x);
  report.seed = seed;
  report.detector_grid = opts.detector_grid;
  report.surrogate = has_piecewise_linear(family);

  const InvariantSearch search = detect_common_invariant(
      family, m.weights(), opts.detector_grid, opts.detector_tol, opts.detector_max_iter);
  report.hypothesis_violated = search.found;
  report.invariant_residual = search.residual;

  // Pass 1: per-trial slopes.
  std::vector<TrialSlope> results(static_cast<size_t>(trials));
  parallel_for(trials, opts.jobs, [&](long t) {
    const auto states = sample_chain(p, m, n, trial_seed(seed, static_cast<std::uint64_t>(t)));
    results[static_cast<size_t>(t)] =
        slope_from_trace(ladder_trace(family, states, x, opts.ladder.delta0, opts.ladder.rungs));
  });
  for (const auto& r : results) {
    if (r.blown)
      ++report.blown_trials;
    else
      report.per_trial_slopes.push_back(r.slope);
  }
  if (report.per_trial_slopes.empty())
    throw AllLaddersBlewUp("local_sync_experiment: every trial blew up", {});

  report.lambda_hat = median(report.per_trial_slopes);
  report.lambda0_hat = quantile(report.per_trial_slopes, 0.95);
  report.rho_hat = std::exp(report.lambda_hat);

  // Pass 2: decay check against exp(lambda_hat/2 * t); trials are replayed
  // from their seeds, so the two passes see identical orbits.
  const double half_rate = 0.5 * report.lambda_hat;
  std::vector<std::uint8_t> synced(static_cast<size_t>(trials), 0);
  parallel_for(trials, opts.jobs, [&](long t) {
    const auto states = sample_chain(p, m, n, trial_seed(seed, static_cast<std::uint64_t>(t)));
    const auto trace = ladder_trace(family, states, x, opts.ladder.delta0, opts.ladder.rungs);
    for (const auto& row : trace) {
      bool ok = true;
      for (size_t step = 0; step < row.size(); ++step) {
        if (row[step] > half_rate * static_cast<double>(step)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        synced[static_cast<size_t>(t)] = 1;
        break;
      }
    }
  });
  int wins = 0;
  for (auto s : synced) wins += s;
  report.sync_fraction = static_cast<double>(wins) / static_cast<double>(trials);
  return report;
}

ScanResult uniform_bound_scan(const MapFamily& family, const FiniteKernel& p,
                              const StationaryVector& m, int grid_points, int trials, long n,
                              std::uint64_t seed, const SyncOptions& opts) {
  ScanResult result;
  result.seed = seed;
  result.trials = trials;
  result.steps = n;

  const InvariantSearch search = detect_common_invariant(
      family, m.weights(), opts.detector_grid, opts.detector_tol, opts.detector_max_iter);
  result.hypothesis_violated = search.found;
  result.invariant_residual = search.residual;

  result.x_grid.resize(static_cast<size_t>(grid_points));
  result.upper_quantile.resize(static_cast<size_t>(grid_points));
  std::vector<int> blown_everywhere(static_cast<size_t>(grid_points), 0);
  parallel_for(grid_points, opts.jobs, [&](long g) {
    const double x = (static_cast<double>(g) + 0.5) / grid_points;
    const std::uint64_t point_master = mix64(seed ^ mix64(static_cast<std::uint64_t>(g) + 1));
    std::vector<double> slopes;
    slopes.reserve(static_cast<size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      const auto states = sample_chain(p, m, n, trial_seed(point_master, static_cast<std::uint64_t>(t)));
      const TrialSlope ts =
          slope_from_trace(ladder_trace(family, states, x, opts.ladder.delta0, opts.ladder.rungs));
      if (!ts.blown) slopes.push_back(ts.slope);
    }
    result.x_grid[static_cast<size_t>(g)] = x;
    if (slopes.empty()) {
      blown_everywhere[static_cast<size_t>(g)] = 1;
      return;
    }
    result.upper_quantile[static_cast<size_t>(g)] = quantile(std::move(slopes), 0.95);
  });
  for (int g = 0; g < grid_points; ++g)
    if (blown_everywhere[static_cast<size_t>(g)])
      throw AllLaddersBlewUp("uniform_bound_scan: every trial blew up at a grid point", {});

  result.lambda0_hat = *std::max_element(result.upper_quantile.begin(), result.upper_quantile.end());
  return result;
}

ExponentEstimate exponent_of_invariant_measure(const SkewMeasure& mu, const MapFamily& family,
                                               const FiniteKernel& p, int samples, long n,
                                               std::uint64_t seed, const LadderOptions& ladder) {
  ExponentEstimate est;
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    SplitMix64 rng = stream_for(seed, static_cast<std::uint64_t>(s));
    const int a = sample_index(rng, mu.base.weights());
    const double x = mu.family[static_cast<size_t>(a)].sample_point(rng);
    const std::uint64_t chain_seed = rng.next();
    try {
      const auto states = sample_chain(p, a, n, chain_seed);
      const TrialSlope ts = slope_from_trace(ladder_trace(family, states, x, ladder.delta0, ladder.rungs));
      if (ts.blown) {
        ++est.blown;
        continue;
      }
      sum += ts.slope;
      sum_sq += ts.slope * ts.slope;
      ++est.used;
    } catch (const AllLaddersBlewUp&) {
      ++est.blown;
    }
  }
  if (est.used == 0) throw AllLaddersBlewUp("exponent_of_invariant_measure: no usable samples", {});
  est.value = sum / est.used;
  if (est.used > 1) {
    const double var = std::max(0.0, (sum_sq - est.used * est.value * est.value) / (est.used - 1));
    est.std_error = std::sqrt(var / est.used);
  }
  return est;
}

}  // namespace markiter
