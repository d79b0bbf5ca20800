// Acceptance suite: one line per criterion, spec'd tolerances pinned in
// code, nonzero exit when anything fails. Heavier statistical checks live
// here rather than in the unit tests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "markiter/config.hpp"
#include "markiter/correspondence.hpp"
#include "markiter/errors.hpp"
#include "markiter/io.hpp"
#include "markiter/runner.hpp"
#include "markiter/sync.hpp"
#include "markiter/trajectory.hpp"

using namespace markiter;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<Criterion> results;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void record(int id, const std::string& name, bool pass, const std::string& detail, double secs,
            double budget) {
  const bool ok = pass && secs < budget;
  results.push_back({id, name, ok, detail, secs});
  std::printf("criterion %2d (%s): %s (%s) [%.2f s / budget %.0f s]\n", id, name.c_str(),
              ok ? "PASS" : "FAIL", detail.c_str(), secs, budget);
  std::fflush(stdout);
}

std::string fmt(double v) { return format_double(v); }

FiniteKernel random_positive_kernel(SplitMix64& rng, int k, double floor = 0.1) {
  std::vector<std::vector<double>> rows(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(k)));
  for (auto& row : rows) {
    double sum = 0.0;
    for (auto& v : row) {
      v = floor + rng.uniform();
      sum += v;
    }
    for (auto& v : row) v /= sum;
  }
  return FiniteKernel(rows);
}

CircleMap conjugated_hyperbolic(double lam, double x_star) {
  const double c = std::cos(3.141592653589793 * x_star);
  const double s = std::sin(3.141592653589793 * x_star);
  return CircleMap::projective({{{lam * c * c + s * s / lam, (lam - 1.0 / lam) * c * s},
                                 {(lam - 1.0 / lam) * c * s, lam * s * s + c * c / lam}}});
}

CircleMap random_contracting_map(SplitMix64& rng) {
  return conjugated_hyperbolic(2.0 + 2.0 * rng.uniform(), rng.uniform());
}

CircleMap random_any_map(SplitMix64& rng) {
  switch (rng.below(3)) {
    case 0:
      return CircleMap::rotation(rng.uniform());
    case 1:
      return random_contracting_map(rng);
    default: {
      const int r = 3 + static_cast<int>(rng.below(3));
      std::vector<double> breaks(static_cast<size_t>(r)), images(static_cast<size_t>(r));
      for (auto& v : breaks) v = rng.uniform();
      for (auto& v : images) v = rng.uniform();
      std::sort(breaks.begin(), breaks.end());
      std::sort(images.begin(), images.end());
      for (int i = 1; i < r; ++i) {
        breaks[static_cast<size_t>(i)] = std::max(breaks[static_cast<size_t>(i)], breaks[static_cast<size_t>(i) - 1] + 1e-4);
        images[static_cast<size_t>(i)] = std::max(images[static_cast<size_t>(i)], images[static_cast<size_t>(i) - 1] + 1e-4);
      }
      if (breaks.back() >= 1.0 || images.back() >= images.front() + 1.0)
        return CircleMap::rotation(rng.uniform());
      return CircleMap::piecewise_linear(std::move(breaks), std::move(images));
    }
  }
}

ProductMeasure random_product(SplitMix64& rng, const StationaryVector& m, int n) {
  std::vector<GridMeasure> parts;
  for (int a = 0; a < m.size(); ++a) {
    std::vector<double> w(static_cast<size_t>(n));
    for (auto& v : w) v = rng.uniform() + 1e-3;
    parts.push_back(GridMeasure::from_weights(std::move(w)));
  }
  return ProductMeasure(m, std::move(parts));
}

struct BoundedInstance {
  BoundedPair pair;
  FiniteKernel dual;
  MapFamily family;
  SolveResult solved;
};

// Shared between criteria 4 and 5.
std::vector<BoundedInstance> solved_instances;

void criterion_1() {
  Timer timer;
  SplitMix64 rng(1001);
  double worst_balance = 0.0, worst_involution = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + t % 7;  // k ranges over 2..8
    const FiniteKernel p = random_positive_kernel(rng, k);
    const StationaryVector m = stationary_distribution(p);
    const FiniteKernel q = dual_kernel(p, m);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        worst_balance = std::max(worst_balance, std::abs(m[i] * q(i, j) - m[j] * p(j, i)));
    const FiniteKernel back = dual_kernel(q, m);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        worst_involution = std::max(worst_involution, std::abs(back(i, j) - p(i, j)));
  }
  record(1, "dual-kernel-exactness", worst_balance <= 1e-14 && worst_involution <= 1e-12,
         "balance " + fmt(worst_balance) + " <= 1e-14, involution " + fmt(worst_involution) +
             " <= 1e-12, 100 kernels k<=8",
         timer.seconds(), 1.0);
}

void criterion_2() {
  Timer timer;
  SplitMix64 rng(1002);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + t % 3;  // k ranges over 2..4
    const FiniteKernel p = random_positive_kernel(rng, k);
    const StationaryVector m = stationary_distribution(p);
    const FiniteKernel q = dual_kernel(p, m);
    std::vector<std::vector<double>> kappa(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(k)));
    for (auto& row : kappa)
      for (auto& v : row) v = rng.uniform();
    worst = std::max(worst, duality_identity_residual(p, q, m, kappa));
  }
  record(2, "duality-identity", worst <= 1e-12,
         "max residual " + fmt(worst) + " <= 1e-12, 100 random kappa", timer.seconds(), 1.0);
}

void criterion_3() {
  Timer timer;
  SplitMix64 rng(1003);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int k = 2 + t % 3;
    const int n = 16 << (t % 4);  // 16..128
    const FiniteKernel p = random_positive_kernel(rng, k);
    const StationaryVector m = stationary_distribution(p);
    const BoundedPair pair = boundedness_constant(p, m);
    const FiniteKernel q = dual_kernel(p, m);
    std::vector<CircleMap> maps;
    for (int a = 0; a < k; ++a) maps.push_back(random_any_map(rng));
    const MapFamily family(std::move(maps));
    const ProductMeasure nu = random_product(rng, m, n);
    const ProductMeasure da = markov_operator_direct(pair, family, nu);
    const ProductMeasure db = markov_operator_dual(pair, q, family, nu);
    worst = std::max(worst, max_state_tv(da.disintegration, db.disintegration));
  }
  record(3, "operator-form-equivalence", worst <= 1e-12,
         "max per-state TV " + fmt(worst) + " <= 1e-12, 50 instances k<=4 N<=128",
         timer.seconds(), 10.0);
}

void criterion_4() {
  Timer timer;
  SplitMix64 rng(1004);
  const double tol = 1e-10;
  double worst_rt = 0.0, worst_skew = 0.0;
  bool all_converged = true;
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + t % 3;
    const FiniteKernel p = random_positive_kernel(rng, k);
    const StationaryVector m = stationary_distribution(p);
    const BoundedPair pair = boundedness_constant(p, m);
    const FiniteKernel q = dual_kernel(p, m);
    std::vector<CircleMap> maps;
    for (int a = 0; a < k; ++a) maps.push_back(random_contracting_map(rng));
    MapFamily family(std::move(maps));
    SolveResult sol =
        fixed_point_stationary(pair, q, family, ProductMeasure::uniform(m, 256), tol, 30000);
    all_converged = all_converged && sol.converged;
    const SkewMeasure mu = invariant_from_stationary(sol.measure, q);
    worst_skew = std::max(worst_skew, skew_invariance_residual(pair, q, family, mu));
    const RoundtripResiduals rt = roundtrip_residuals(sol.measure, mu, family, q);
    worst_rt = std::max({worst_rt, rt.stationary_cycle, rt.invariant_cycle});
    solved_instances.push_back(BoundedInstance{pair, q, std::move(family), std::move(sol)});
  }
  record(4, "correspondence-roundtrips", all_converged && worst_rt <= 1e-8 && worst_skew <= 1e-8,
         std::string(all_converged ? "all solves converged" : "SOLVE DID NOT CONVERGE") +
             ", max roundtrip " + fmt(worst_rt) + " <= 1e-8, max skew-invariance " +
             fmt(worst_skew) + " <= 1e-8, 20 instances N=256 tol=1e-10",
         timer.seconds(), 60.0);
}

void criterion_5() {
  Timer timer;
  double worst_violation = 0.0;
  for (const auto& inst : solved_instances) {
    const SkewMeasure mu = invariant_from_stationary(inst.solved.measure, inst.dual);
    const SandwichResult sw = sandwich_check(inst.solved.measure, mu, inst.pair.constant_C);
    worst_violation = std::max(worst_violation, std::max(0.0, -sw.worst_slack));
  }
  // iid drive collapses the sandwich to equality
  const FiniteKernel iid({{0.5, 0.5}, {0.5, 0.5}});
  const StationaryVector m = stationary_distribution(iid);
  const BoundedPair pair = boundedness_constant(iid, m);
  const FiniteKernel q = dual_kernel(iid, m);
  const MapFamily family({CircleMap::projective({{{2.0, 0.0}, {0.0, 0.5}}}),
                          CircleMap::projective({{{1.25, 0.75}, {0.75, 1.25}}})});
  const SolveResult sol =
      fixed_point_stationary(pair, q, family, ProductMeasure::uniform(m, 256), 1e-10, 30000);
  const SkewMeasure mu = invariant_from_stationary(sol.measure, q);
  const GridMeasure pm = phase_marginal(sol.measure);
  double worst_eq = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 256; ++b)
      worst_eq = std::max(worst_eq, std::abs(mu.family[static_cast<size_t>(a)][b] - pm[b]));
  record(5, "sandwich-bounds",
         worst_violation <= 1e-12 && worst_eq <= 1e-12 && !solved_instances.empty(),
         "max violation " + fmt(worst_violation) + " <= 1e-12 on " +
             std::to_string(solved_instances.size()) + " bounded instances, iid equality gap " +
             fmt(worst_eq) + " <= 1e-12",
         timer.seconds(), 60.0);
}

void criterion_6() {
  Timer timer;
  SplitMix64 rng(1006);
  double worst_shift = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + t % 2;  // k in {2,3}
    const int len_l = 1 + t % 3;  // L in {1,2,3}
    const FiniteKernel p = random_positive_kernel(rng, k);
    const StationaryVector m = stationary_distribution(p);
    const FiniteKernel q = dual_kernel(p, m);
    std::vector<double> g(static_cast<size_t>(k));
    for (auto& v : g) v = rng.uniform();
    const long words = static_cast<long>(std::pow(k, len_l + 1));
    std::vector<double> table(static_cast<size_t>(words));
    for (auto& v : table) v = rng.uniform();
    const auto u = [&](const std::vector<int>& w) {
      long idx = 0;
      for (int c : w) idx = idx * k + c;
      return table[static_cast<size_t>(idx)];
    };
    worst_shift = std::max(worst_shift, check_shift_duality(p, q, m, g, u, len_l));
  }

  bool cond_ok = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string cond_note;
  try {
    // constant indicator, worked 2-state kernel: margin is exactly 1 - C
    const FiniteKernel p2({{0.9, 0.1}, {0.2, 0.8}});
    const StationaryVector m2 = stationary_distribution(p2);
    const BoundedPair pair2 = boundedness_constant(p2, m2);
    const MapFamily fam2({conjugated_hyperbolic(2.0, 0.0), conjugated_hyperbolic(2.0, 0.25)});
    CylinderBinIndicator ones{2, 16, std::vector<std::uint8_t>(4 * 16, 1)};
    auto r = check_conditional_bound(pair2, fam2, ones, 0.1, 3);
    cond_ok = cond_ok && r.holds && std::abs(r.margin - (1.0 - pair2.constant_C)) < 1e-12;
    worst_margin = std::min(worst_margin, r.margin);

    // absorbing-bin indicator on a common-fixed-point family
    const MapFamily contracting({conjugated_hyperbolic(2.0, 0.3), conjugated_hyperbolic(3.0, 0.3)});
    const int target = GridMeasure::bin_of(0.3, 16);
    CylinderBinIndicator habs{2, 16, std::vector<std::uint8_t>(4 * 16, 1)};
    for (long w = 0; w < 4; ++w) habs.table[static_cast<size_t>(w * 16 + target)] = 0;
    r = check_conditional_bound(pair2, contracting, habs, 0.3, 3);
    cond_ok = cond_ok && r.holds;
    worst_margin = std::min(worst_margin, r.margin);

    // bin-exact rotations with an invariant even-bin set, k = 3
    const FiniteKernel p3({{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}});
    const StationaryVector m3 = stationary_distribution(p3);
    const BoundedPair pair3 = boundedness_constant(p3, m3);
    const MapFamily rots({CircleMap::rotation(0.25), CircleMap::rotation(0.5),
                          CircleMap::rotation(0.75)});
    CylinderBinIndicator hrot{2, 8, std::vector<std::uint8_t>(9 * 8, 0)};
    for (long w = 0; w < 9; ++w)
      for (int b = 0; b < 8; b += 2) hrot.table[static_cast<size_t>(w * 8 + b)] = 1;
    r = check_conditional_bound(pair3, rots, hrot, 0.05, 2);
    cond_ok = cond_ok && r.holds;
    worst_margin = std::min(worst_margin, r.margin);

    // three contracting maps sharing the fixed point, k = 3, n = 3
    const MapFamily tri({conjugated_hyperbolic(2.0, 0.3), conjugated_hyperbolic(3.0, 0.3),
                         conjugated_hyperbolic(2.5, 0.3)});
    CylinderBinIndicator htri{2, 16, std::vector<std::uint8_t>(9 * 16, 1)};
    for (long w = 0; w < 9; ++w) htri.table[static_cast<size_t>(w * 16 + target)] = 0;
    r = check_conditional_bound(pair3, tri, htri, 0.3, 3);
    cond_ok = cond_ok && r.holds;
    worst_margin = std::min(worst_margin, r.margin);
  } catch (const std::exception& e) {
    cond_ok = false;
    cond_note = std::string("; exception: ") + e.what();
  }

  record(6, "exact-lemma-enumeration", worst_shift <= 1e-12 && cond_ok,
         "shift-duality max " + fmt(worst_shift) + " <= 1e-12 (100 draws), conditional bound " +
             (cond_ok ? "holds" : "FAILED") + " with min margin " + fmt(worst_margin) + cond_note,
         timer.seconds(), 30.0);
}

void criterion_7() {
  Timer timer;
  const FiniteKernel p({{0.9, 0.1}, {0.2, 0.8}});
  const StationaryVector m = stationary_distribution(p);
  const BoundedPair pair = boundedness_constant(p, m);
  const FiniteKernel q = dual_kernel(p, m);
  const MapFamily family({CircleMap::projective({{{2.0, 0.0}, {0.0, 0.5}}}),
                          CircleMap::projective({{{1.25, 0.75}, {0.75, 1.25}}})});
  const int n = 64;
  const SolveResult sol =
      fixed_point_stationary(pair, q, family, ProductMeasure::uniform(m, n), 1e-10, 30000);
  // 4 trials x 251000 steps kept past burn-in = 1e6 samples
  const ProductMeasure emp = empirical_product_measure(p, family, m, 4, 251000, 1000, n, 2025);
  double worst = 0.0;
  for (int a = 0; a < 2; ++a)
    worst = std::max(worst, tv_distance(emp.disintegration[static_cast<size_t>(a)],
                                        sol.measure.disintegration[static_cast<size_t>(a)]));
  record(7, "simulation-vs-solver", sol.converged && worst <= 0.05,
         "max per-state TV " + fmt(worst) + " <= 0.05 at 1e6 samples, k=2 N=64",
         timer.seconds(), 60.0);
}

void criterion_8() {
  Timer timer;
  // irreducible contracting instance
  const FiniteKernel p({{0.9, 0.1}, {0.2, 0.8}});
  const StationaryVector m = stationary_distribution(p);
  const BoundedPair pair = boundedness_constant(p, m);
  const FiniteKernel q = dual_kernel(p, m);
  const MapFamily family({CircleMap::projective({{{2.0, 0.0}, {0.0, 0.5}}}),
                          CircleMap::projective({{{1.25, 0.75}, {0.75, 1.25}}})});
  const int n = 256;
  const SolveResult sol =
      fixed_point_stationary(pair, q, family, ProductMeasure::uniform(m, n), 1e-10, 30000);

  SplitMix64 rng(1008);
  std::vector<std::function<double(int, int)>> phis;
  std::vector<double> freq, phase, amp0, amp1;
  for (int j = 0; j < 10; ++j) {
    freq.push_back(1.0 + rng.below(4));
    phase.push_back(rng.uniform());
    amp0.push_back(rng.uniform());
    amp1.push_back(rng.uniform());
  }
  for (int j = 0; j < 10; ++j) {
    phis.emplace_back([&, j](int a, int b) {
      return (a == 0 ? amp0[static_cast<size_t>(j)] : amp1[static_cast<size_t>(j)]) *
             std::cos(2.0 * 3.141592653589793 *
                      (freq[static_cast<size_t>(j)] * (b + 0.5) / 256.0 + phase[static_cast<size_t>(j)]));
    });
  }
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    const auto states = sample_chain(p, m, 1000000, stream_for(2026, static_cast<std::uint64_t>(s)).next());
    SplitMix64 xr = stream_for(2027, static_cast<std::uint64_t>(s));
    const OrbitSample orbit = iterate(family, states, xr.uniform());
    for (int j = 0; j < 10; ++j)
      worst = std::max(worst, std::abs(birkhoff_average(orbit, 256, phis[static_cast<size_t>(j)]) -
                                       integrate(sol.measure, phis[static_cast<size_t>(j)])));
  }

  // reducible instance: both maps preserve [0, 1/2) and [1/2, 1)
  const MapFamily split({CircleMap::piecewise_linear({0.0, 0.25, 0.5, 0.75}, {0.0, 0.1, 0.5, 0.6}),
                         CircleMap::piecewise_linear({0.0, 0.25, 0.5, 0.75}, {0.0, 0.15, 0.5, 0.55})});
  const auto left_half = [](int, int b) { return b < 128 ? 1.0 : 0.0; };
  const auto states_a = sample_chain(p, m, 100000, 31337);
  const auto states_b = sample_chain(p, m, 100000, 31338);
  const double avg_left = birkhoff_average(iterate(split, states_a, 0.2), 256, left_half);
  const double avg_right = birkhoff_average(iterate(split, states_b, 0.7), 256, left_half);
  const double gap = std::abs(avg_left - avg_right);

  record(8, "ergodicity-behavior", sol.converged && worst <= 0.02 && gap > 0.1,
         "irreducible: max |birkhoff - integral| " + fmt(worst) +
             " <= 0.02 (10 functions x 10 starts, n=1e6); reducible: arc averages differ by " +
             fmt(gap) + " > 0.1",
         timer.seconds(), 120.0);
}

void criterion_9() {
  Timer timer;
  const FiniteKernel p({{0.9, 0.1}, {0.2, 0.8}});
  const StationaryVector m = stationary_distribution(p);
  const BoundedPair pair = boundedness_constant(p, m);
  const MapFamily family({CircleMap::projective({{{2.0, 0.0}, {0.0, 0.5}}}),
                          CircleMap::projective({{{1.25, 0.75}, {0.75, 1.25}}})});
  SyncOptions opts;
  const ContractionReport report = local_sync_experiment(family, p, m, 0.1, 200, 10000, 2028, opts);

  const MapFamily rotations({CircleMap::rotation(0.377964473), CircleMap::rotation(0.135623746)});
  const ContractionReport control = local_sync_experiment(rotations, p, m, 0.1, 50, 2000, 2029, opts);
  double control_max_abs_slope = 0.0;
  for (double s : control.per_trial_slopes)
    control_max_abs_slope = std::max(control_max_abs_slope, std::abs(s));

  const ScanResult scan = uniform_bound_scan(family, p, m, 32, 50, 2000, 2030, opts);

  const bool pass = std::abs(pair.constant_C - 0.3) < 1e-12 && report.lambda_hat < -0.01 &&
                    report.sync_fraction >= 0.9 && !report.hypothesis_violated &&
                    control.hypothesis_violated && control_max_abs_slope == 0.0 &&
                    scan.lambda0_hat < -0.005;
  record(9, "local-synchronization", pass,
         "C=" + fmt(pair.constant_C) + ", lambda_hat " + fmt(report.lambda_hat) +
             " < -0.01, sync_fraction " + fmt(report.sync_fraction) +
             " >= 0.9 (200 trials, n=1e4); rotation control slopes max|.| " +
             fmt(control_max_abs_slope) + " == 0 and flagged=" +
             (control.hypothesis_violated ? "yes" : "NO") + "; scan lambda0_hat " +
             fmt(scan.lambda0_hat) + " < -0.005 (32-point grid)",
         timer.seconds(), 300.0);
}

void criterion_10() {
  Timer timer;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "markiter_acceptance_rerun";
  fs::remove_all(base);

  ExperimentConfig cfg = ExperimentConfig::preset("projective-pair");
  cfg.override_grid(64);
  bool ok = true;
  std::string detail;

  run_solve(cfg, (base / "solve_a").string());
  run_solve(cfg, (base / "solve_b").string());
  for (const char* name : {"summary.json", "measure.csv", "cesaro.csv"})
    ok = ok && read_text_file((base / "solve_a" / name).string()) ==
                   read_text_file((base / "solve_b" / name).string());
  if (!ok) detail += "solve outputs differ; ";

  ExperimentConfig sync_cfg = ExperimentConfig::preset("projective-pair");
  sync_cfg.override_grid(64);
  nlohmann::json sj_a, sj_b;
  {
    const FiniteKernel p = sync_cfg.build_kernel();
    const StationaryVector m = stationary_distribution(p);
    const MapFamily family = sync_cfg.build_family();
    SyncOptions opts;
    opts.detector_grid = 64;
    sj_a = report_to_json(local_sync_experiment(family, p, m, 0.1, 20, 1000, 5, opts));
    sj_b = report_to_json(local_sync_experiment(family, p, m, 0.1, 20, 1000, 5, opts));
  }
  const bool sync_same = sj_a.dump() == sj_b.dump();
  if (!sync_same) detail += "sync reports differ; ";

  const FiniteKernel p = cfg.build_kernel();
  const StationaryVector m = stationary_distribution(p);
  const MapFamily family = cfg.build_family();
  const std::string emp_a =
      product_measure_csv(empirical_product_measure(p, family, m, 2, 20000, 1000, 64, 99));
  const std::string emp_b =
      product_measure_csv(empirical_product_measure(p, family, m, 2, 20000, 1000, 64, 99));
  const bool emp_same = emp_a == emp_b;
  if (!emp_same) detail += "empirical measures differ; ";

  fs::remove_all(base);
  ok = ok && sync_same && emp_same;
  record(10, "determinism", ok,
         ok ? "solver files, sync reports, and empirical CSVs byte-identical on rerun"
            : detail,
         timer.seconds(), 60.0);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();

  int failures = 0;
  for (const auto& c : results) failures += c.pass ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}
