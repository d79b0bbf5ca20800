#include "markiter/correspondence.hpp"

#include "markiter/errors.hpp"

namespace markiter {

ProductMeasure stationary_from_invariant(const SkewMeasure& mu, const MapFamily& family) {
  if (family.size() != mu.states())
    throw ShapeMismatch("stationary_from_invariant: family size vs states");
  std::vector<GridMeasure> parts;
  parts.reserve(static_cast<size_t>(mu.states()));
  for (int a = 0; a < mu.states(); ++a)
    parts.push_back(pushforward(family[a], mu.family[static_cast<size_t>(a)]));
  return ProductMeasure(mu.base, std::move(parts));
}

SkewMeasure invariant_from_stationary(const ProductMeasure& nu, const FiniteKernel& dual) {
  if (dual.size() != nu.states())
    throw ShapeMismatch("invariant_from_stationary: kernel size vs states");
  const int n = nu.grid();
  std::vector<GridMeasure> parts;
  parts.reserve(static_cast<size_t>(nu.states()));
  for (int a = 0; a < nu.states(); ++a) {
    std::vector<double> mixed(static_cast<size_t>(n), 0.0);
    for (int b = 0; b < nu.states(); ++b) {
      const double w = dual(a, b);
      if (w == 0.0) continue;
      const auto& src = nu.disintegration[static_cast<size_t>(b)].weights();
      for (int i = 0; i < n; ++i) mixed[static_cast<size_t>(i)] += w * src[static_cast<size_t>(i)];
    }
    parts.push_back(GridMeasure::from_weights(std::move(mixed)));
  }
  return SkewMeasure(nu.marginal, std::move(parts));
}

RoundtripResiduals roundtrip_residuals(const ProductMeasure& nu, const SkewMeasure& mu,
                                       const MapFamily& family, const FiniteKernel& dual) {
  const ProductMeasure nu_cycle = stationary_from_invariant(invariant_from_stationary(nu, dual), family);
  const SkewMeasure mu_cycle = invariant_from_stationary(stationary_from_invariant(mu, family), dual);
  return RoundtripResiduals{max_state_tv(nu_cycle.disintegration, nu.disintegration),
                            max_state_tv(mu_cycle.family, mu.family)};
}

}  // namespace markiter
