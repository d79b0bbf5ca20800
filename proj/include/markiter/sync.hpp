#pragma once

#include <cstdint>
#include <vector>

#include "markiter/circle.hpp"
#include "markiter/kernels.hpp"
#include "markiter/measure.hpp"
#include "markiter/trajectory.hpp"

namespace markiter {

// Ladder surrogate for the contraction exponent: a double limsup is not
// computable, so arcs [x, x + delta0 * 2^-j) for j = 0..rungs-1 stand in for
// the y -> x limit and a least-squares slope of log-diameter stands in for
// the limit in n. Parameters are carried into every report.
struct LadderOptions {
  double delta0 = 0.125;
  int rungs = 7;
};

struct SyncOptions {
  LadderOptions ladder;
  int detector_grid = 512;
  double detector_tol = 1e-10;
  long detector_max_iter = 20000;
  int jobs = 1;
};

struct ContractionReport {
  std::vector<double> per_trial_slopes;  // finite slopes, trial order
  double lambda_hat = 0.0;               // pooled median slope
  double lambda0_hat = 0.0;              // 95th-percentile slope at this x
  double rho_hat = 1.0;                  // exp(lambda_hat)
  double sync_fraction = 0.0;
  int trials = 0;
  int blown_trials = 0;  // every rung escaped diameter 1/4
  long steps = 0;
  double delta0 = 0.0;
  int rungs = 0;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  bool hypothesis_violated = false;     // a common invariant measure was found
  double invariant_residual = 0.0;      // detector residual
  int detector_grid = 0;
  bool surrogate = false;  // family contains piecewise-linear maps
};

// Least-squares slope of log-diameter along one sampled driving word, read
// off the deepest ladder rung whose diameter stays below 1/4 throughout.
// Exactly 0 for rotation families. Throws AllLaddersBlewUp when no rung
// survives.
double estimate_exponent(const MapFamily& family, const FiniteKernel& p, const ChainStart& start,
                         double x, double delta0, long n, std::uint64_t seed, int rungs = 7);

// Seeded trials of estimate_exponent pooled into a ContractionReport; a
// trial counts as synchronized when some rung's diameter stays below
// exp(lambda_hat/2 * t) for every step t (the square root absorbs finite-n
// fluctuation). Runs the common-invariant detector first and flags the
// report when the no-common-measure hypothesis fails.
ContractionReport local_sync_experiment(const MapFamily& family, const FiniteKernel& p,
                                        const StationaryVector& m, double x, int trials, long n,
                                        std::uint64_t seed, const SyncOptions& opts = {});

struct ScanResult {
  std::vector<double> x_grid;
  std::vector<double> upper_quantile;  // per-x 95th-percentile slope
  double lambda0_hat = 0.0;            // max over x
  bool hypothesis_violated = false;
  double invariant_residual = 0.0;
  std::uint64_t seed = 0;
  int trials = 0;
  long steps = 0;
};

ScanResult uniform_bound_scan(const MapFamily& family, const FiniteKernel& p,
                              const StationaryVector& m, int grid_points, int trials, long n,
                              std::uint64_t seed, const SyncOptions& opts = {});

struct ExponentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int used = 0;
  int blown = 0;
};

// Monte Carlo average of the ladder slope over (state, point) drawn from the
// invariant measure: state from the base, point from that state's member.
ExponentEstimate exponent_of_invariant_measure(const SkewMeasure& mu, const MapFamily& family,
                                               const FiniteKernel& p, int samples, long n,
                                               std::uint64_t seed,
                                               const LadderOptions& ladder = {});

}  // namespace markiter
