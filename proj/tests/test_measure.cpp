#include <doctest.h>

#include <cmath>

#include "markiter/correspondence.hpp"
#include "markiter/errors.hpp"
#include "markiter/measure.hpp"
#include "markiter/rng.hpp"

using namespace markiter;

namespace {

struct Instance {
  BoundedPair pair;
  FiniteKernel dual;
  MapFamily family;
};

Instance worked_instance(int flavor = 0) {
  const FiniteKernel p({{0.9, 0.1}, {0.2, 0.8}});
  const StationaryVector m = stationary_distribution(p);
  std::vector<CircleMap> maps;
  if (flavor == 0) {
    maps = {CircleMap::projective({{{2.0, 0.0}, {0.0, 0.5}}}),
            CircleMap::projective({{{1.25, 0.75}, {0.75, 1.25}}})};
  } else {
    maps = {CircleMap::identity(), CircleMap::identity()};
  }
  return Instance{boundedness_constant(p, m), dual_kernel(p, m), MapFamily(std::move(maps))};
}

FiniteKernel random_positive_kernel(SplitMix64& rng, int k) {
  std::vector<std::vector<double>> rows(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(k)));
  for (auto& row : rows) {
    double sum = 0.0;
    for (auto& v : row) {
      v = 0.1 + rng.uniform();
      sum += v;
    }
    for (auto& v : row) v /= sum;
  }
  return FiniteKernel(rows);
}

CircleMap random_hyperbolic(SplitMix64& rng) {
  const double lam = 1.5 + 2.5 * rng.uniform();
  const double ang = 3.141592653589793 * rng.uniform();
  const double c = std::cos(ang), s = std::sin(ang);
  return CircleMap::projective({{{lam * c * c + s * s / lam, (lam - 1.0 / lam) * c * s},
                                 {(lam - 1.0 / lam) * c * s, lam * s * s + c * c / lam}}});
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

}  // namespace

TEST_CASE("grid measure validation and TV") {
  CHECK_THROWS(GridMeasure({0.5, 0.6}));
  CHECK_THROWS(GridMeasure({-0.5, 1.5}));
  CHECK_THROWS(GridMeasure(std::vector<double>{}));
  const GridMeasure a({0.25, 0.75});
  const GridMeasure b({0.75, 0.25});
  CHECK(tv_distance(a, b) == doctest::Approx(0.5));
  CHECK_THROWS_AS(tv_distance(a, GridMeasure::uniform(3)), ShapeMismatch);
  CHECK(GridMeasure::point_mass(4, 2)[2] == 1.0);
}

TEST_CASE("product and skew measure shape checks") {
  const StationaryVector m({0.5, 0.5});
  CHECK_THROWS_AS(ProductMeasure(m, {GridMeasure::uniform(8)}), ShapeMismatch);
  CHECK_THROWS_AS(ProductMeasure(m, {GridMeasure::uniform(8), GridMeasure::uniform(4)}), ShapeMismatch);
  CHECK_THROWS_AS(SkewMeasure(m, {GridMeasure::uniform(8)}), ShapeMismatch);
}

TEST_CASE("identity family reduces the dual-form operator to kernel mixing") {
  const Instance inst = worked_instance(1);
  SplitMix64 rng(3);
  const ProductMeasure nu = random_product(rng, inst.pair.stationary, 32);
  const ProductMeasure out = markov_operator_dual(inst.pair, inst.dual, inst.family, nu);
  for (int a = 0; a < 2; ++a) {
    std::vector<double> want(32, 0.0);
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 32; ++i)
        want[static_cast<size_t>(i)] += inst.dual(a, b) * nu.disintegration[static_cast<size_t>(b)][i];
    for (int i = 0; i < 32; ++i)
      CHECK(out.disintegration[static_cast<size_t>(a)][i] == doctest::Approx(want[static_cast<size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("single-state chain degenerates to the plain transfer operator") {
  const FiniteKernel p(std::vector<std::vector<double>>{{1.0}});
  const StationaryVector m({1.0});
  const BoundedPair pair = boundedness_constant(p, m);
  const FiniteKernel q = dual_kernel(p, m);
  const CircleMap f = CircleMap::projective({{{2.0, 0.0}, {0.0, 0.5}}});
  const MapFamily family({f});
  SplitMix64 rng(5);
  std::vector<double> w(64);
  for (auto& v : w) v = rng.uniform();
  const GridMeasure mu = GridMeasure::from_weights(std::move(w));
  const ProductMeasure nu(m, {mu});
  const ProductMeasure out = markov_operator_direct(pair, family, nu);
  CHECK(tv_distance(out.disintegration[0], pushforward(f, mu)) < 1e-14);
  CHECK(markov_operator_dual(pair, q, family, nu).disintegration[0].weights() ==
        out.disintegration[0].weights());
}

TEST_CASE("direct and dual operator forms agree on random instances") {
  SplitMix64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const int n = 16 << rng.below(3);
    const FiniteKernel p = random_positive_kernel(rng, k);
    const StationaryVector m = stationary_distribution(p);
    const BoundedPair pair = boundedness_constant(p, m);
    const FiniteKernel q = dual_kernel(p, m);
    std::vector<CircleMap> maps;
    for (int a = 0; a < k; ++a) maps.push_back(random_hyperbolic(rng));
    const MapFamily family(std::move(maps));
    const ProductMeasure nu = random_product(rng, m, n);
    const ProductMeasure da = markov_operator_direct(pair, family, nu);
    const ProductMeasure db = markov_operator_dual(pair, q, family, nu);
    CHECK(max_state_tv(da.disintegration, db.disintegration) <= 1e-12);
    // first marginal preserved bit-for-bit
    for (int a = 0; a < k; ++a) CHECK(da.marginal[a] == nu.marginal[a]);
  }
}

TEST_CASE("point mass at a common fixed point is operator-invariant") {
  const FiniteKernel p({{0.9, 0.1}, {0.2, 0.8}});
  const StationaryVector m = stationary_distribution(p);
  const BoundedPair pair = boundedness_constant(p, m);
  // both maps fix x = 0.3 (interior to a bin of 64)
  const auto conj = [](double lam) {
    const double c = std::cos(3.141592653589793 * 0.3), s = std::sin(3.141592653589793 * 0.3);
    return CircleMap::projective({{{lam * c * c + s * s / lam, (lam - 1.0 / lam) * c * s},
                                   {(lam - 1.0 / lam) * c * s, lam * s * s + c * c / lam}}});
  };
  const MapFamily family({conj(2.0), conj(3.0)});
  const GridMeasure delta = GridMeasure::point_mass(64, GridMeasure::bin_of(0.3, 64));
  const ProductMeasure nu(m, {delta, delta});
  const ProductMeasure out = markov_operator_direct(pair, family, nu);
  CHECK(max_state_tv(out.disintegration, nu.disintegration) < 1e-14);
}

TEST_CASE("iid drive makes the direct-operator output independent of the state") {
  const FiniteKernel p({{2.0 / 3.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0 / 3.0}});
  const StationaryVector m = stationary_distribution(p);
  const BoundedPair pair = boundedness_constant(p, m);
  const MapFamily family({CircleMap::rotation(0.21), CircleMap::rotation(0.43)});
  SplitMix64 rng(11);
  const ProductMeasure nu = random_product(rng, m, 32);
  const ProductMeasure out = markov_operator_direct(pair, family, nu);
  // (P nu)_b = f_b # (same mixture) for every b; here maps differ, so compare
  // against the explicit mixture
  std::vector<double> mixed(32, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 32; ++i) mixed[static_cast<size_t>(i)] += m[a] * nu.disintegration[static_cast<size_t>(a)][i];
  const GridMeasure mix = GridMeasure::from_weights(std::move(mixed));
  for (int b = 0; b < 2; ++b)
    CHECK(tv_distance(out.disintegration[static_cast<size_t>(b)], pushforward(family[b], mix)) < 1e-13);
}

TEST_CASE("fixed-point solver converges to the shared attracting point mass") {
  const FiniteKernel p({{0.9, 0.1}, {0.2, 0.8}});
  const StationaryVector m = stationary_distribution(p);
  const BoundedPair pair = boundedness_constant(p, m);
  const FiniteKernel q = dual_kernel(p, m);
  const auto conj = [](double lam) {
    const double c = std::cos(3.141592653589793 * 0.3), s = std::sin(3.141592653589793 * 0.3);
    return CircleMap::projective({{{lam * c * c + s * s / lam, (lam - 1.0 / lam) * c * s},
                                   {(lam - 1.0 / lam) * c * s, lam * s * s + c * c / lam}}});
  };
  const MapFamily family({conj(2.0), conj(3.0)});
  const SolveResult sol = fixed_point_stationary(pair, q, family, ProductMeasure::uniform(m, 64),
                                                 1e-10, 10000);
  CHECK(sol.converged);
  CHECK(sol.residual < 1e-10);
  const int target = GridMeasure::bin_of(0.3, 64);
  for (int a = 0; a < 2; ++a) CHECK(sol.measure.disintegration[static_cast<size_t>(a)][target] > 0.999);
}

TEST_CASE("rotation family with iid drive: Cesaro average lands near uniform") {
  const FiniteKernel p({{0.5, 0.5}, {0.5, 0.5}});
  const StationaryVector m = stationary_distribution(p);
  const BoundedPair pair = boundedness_constant(p, m);
  const FiniteKernel q = dual_kernel(p, m);
  const MapFamily family({CircleMap::rotation(0.381966), CircleMap::rotation(0.118034)});
  SplitMix64 rng(13);
  const int n = 64;
  const SolveResult sol = fixed_point_stationary(pair, q, family, random_product(rng, m, n),
                                                 1e-10, 4000);
  const GridMeasure uniform = GridMeasure::uniform(n);
  for (int a = 0; a < 2; ++a)
    CHECK(tv_distance(sol.cesaro.disintegration[static_cast<size_t>(a)], uniform) <= 4.0 / n);
}

TEST_CASE("contracting projective family converges fast at grid 256") {
  const Instance inst = worked_instance();
  const SolveResult sol = fixed_point_stationary(inst.pair, inst.dual, inst.family,
                                                 ProductMeasure::uniform(inst.pair.stationary, 256),
                                                 1e-10, 10000);
  CHECK(sol.converged);
  CHECK(sol.residual < 1e-10);
  CHECK(sol.iterations < 10000);
}

TEST_CASE("stationarity residual: exchangeable measures under the identity family") {
  const Instance inst = worked_instance(1);
  SplitMix64 rng(17);
  std::vector<double> w(32);
  for (auto& v : w) v = rng.uniform();
  const GridMeasure common = GridMeasure::from_weights(std::move(w));
  const ProductMeasure nu(inst.pair.stationary, {common, common});
  // identity maps and equal members: nu_a = sum_b q_ab nu_b exactly
  CHECK(stationarity_residual(inst.pair, inst.dual, inst.family, nu) < 1e-12);
}

TEST_CASE("stationarity residual: solver output is small, arbitrary input is not") {
  const Instance inst = worked_instance();
  const SolveResult sol = fixed_point_stationary(inst.pair, inst.dual, inst.family,
                                                 ProductMeasure::uniform(inst.pair.stationary, 128),
                                                 1e-10, 10000);
  CHECK(stationarity_residual(inst.pair, inst.dual, inst.family, sol.measure) < 1e-9);
  SplitMix64 rng(19);
  const ProductMeasure junk = random_product(rng, inst.pair.stationary, 128);
  CHECK(stationarity_residual(inst.pair, inst.dual, inst.family, junk) > 0.01);
}

TEST_CASE("skew-invariance residual mirrors the stationarity characterization") {
  const Instance eye = worked_instance(1);
  SplitMix64 rng(23);
  // identity family: condition reduces to mu_a = sum_b q_ab mu_b
  std::vector<double> w(32);
  for (auto& v : w) v = rng.uniform();
  const GridMeasure common = GridMeasure::from_weights(std::move(w));
  const SkewMeasure fixed(eye.pair.stationary, {common, common});
  CHECK(skew_invariance_residual(eye.pair, eye.dual, eye.family, fixed) < 1e-12);

  const Instance inst = worked_instance();
  const SolveResult sol = fixed_point_stationary(inst.pair, inst.dual, inst.family,
                                                 ProductMeasure::uniform(inst.pair.stationary, 128),
                                                 1e-10, 10000);
  const SkewMeasure mu = invariant_from_stationary(sol.measure, inst.dual);
  CHECK(skew_invariance_residual(inst.pair, inst.dual, inst.family, mu) < 1e-9);

  const ProductMeasure junk = random_product(rng, inst.pair.stationary, 128);
  const SkewMeasure junk_mu(junk.marginal, junk.disintegration);
  CHECK(skew_invariance_residual(inst.pair, inst.dual, inst.family, junk_mu) > 0.01);
}

TEST_CASE("phase marginal: equal members and the single-state case") {
  SplitMix64 rng(29);
  std::vector<double> w(16);
  for (auto& v : w) v = rng.uniform();
  const GridMeasure common = GridMeasure::from_weights(std::move(w));
  const ProductMeasure nu(StationaryVector({0.7, 0.3}), {common, common});
  CHECK(tv_distance(phase_marginal(nu), common) < 1e-14);
  const ProductMeasure single(StationaryVector({1.0}), {common});
  CHECK(tv_distance(phase_marginal(single), common) < 1e-15);
}

TEST_CASE("sandwich holds with computed C and collapses to equality for iid drive") {
  const Instance inst = worked_instance();
  const SolveResult sol = fixed_point_stationary(inst.pair, inst.dual, inst.family,
                                                 ProductMeasure::uniform(inst.pair.stationary, 128),
                                                 1e-10, 10000);
  const SkewMeasure mu = invariant_from_stationary(sol.measure, inst.dual);
  const SandwichResult sw = sandwich_check(sol.measure, mu, inst.pair.constant_C);
  CHECK(sw.holds);
  CHECK(sw.worst_slack >= -1e-12);

  // iid drive: C = 1 and mu_a = phase marginal for every a
  const FiniteKernel iid({{0.5, 0.5}, {0.5, 0.5}});
  const StationaryVector um = stationary_distribution(iid);
  const BoundedPair upair = boundedness_constant(iid, um);
  const FiniteKernel uq = dual_kernel(iid, um);
  const SolveResult usol = fixed_point_stationary(upair, uq, inst.family,
                                                  ProductMeasure::uniform(um, 128), 1e-10, 10000);
  const SkewMeasure umu = invariant_from_stationary(usol.measure, uq);
  const GridMeasure pm = phase_marginal(usol.measure);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 128; ++b)
      CHECK(std::abs(umu.family[static_cast<size_t>(a)][b] - pm[b]) <= 1e-12);
  CHECK(sandwich_check(usol.measure, umu, 1.0).holds);
}

TEST_CASE("corrupted invariant measure breaks the sandwich") {
  const Instance inst = worked_instance();
  const SolveResult sol = fixed_point_stationary(inst.pair, inst.dual, inst.family,
                                                 ProductMeasure::uniform(inst.pair.stationary, 128),
                                                 1e-10, 10000);
  const SkewMeasure mu = invariant_from_stationary(sol.measure, inst.dual);
  // move the first member's mass onto the emptiest bin of the phase marginal
  const GridMeasure pm = phase_marginal(sol.measure);
  int empty = 0;
  for (int b = 0; b < 128; ++b)
    if (pm[b] < pm[empty]) empty = b;
  std::vector<GridMeasure> fam = mu.family;
  fam[0] = GridMeasure::point_mass(128, empty);
  const SandwichResult sw = sandwich_check(sol.measure, SkewMeasure(mu.base, std::move(fam)),
                                           inst.pair.constant_C);
  CHECK_FALSE(sw.holds);
  CHECK(sw.worst_slack < -1e-6);
}
