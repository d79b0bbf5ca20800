#pragma once

#include "markiter/measure.hpp"

namespace markiter {

// The bijection between invariant measures with zeroth-coordinate
// disintegration and stationary measures of the skew chain, in both
// directions. Both maps preserve the first marginal exactly.

// nu_a = f_a # mu_a.
ProductMeasure stationary_from_invariant(const SkewMeasure& mu, const MapFamily& family);

// mu_a = sum_b q_ab nu_b; q must be the dual of the driving kernel.
SkewMeasure invariant_from_stationary(const ProductMeasure& nu, const FiniteKernel& dual);

struct RoundtripResiduals {
  double stationary_cycle = 0.0;  // TV between nu and the stationary->invariant->stationary cycle
  double invariant_cycle = 0.0;   // TV between mu and the invariant->stationary->invariant cycle
};

// Round-trip identities hold on the stationary/invariant sets only; for
// arbitrary inputs the residuals are reported, not asserted.
RoundtripResiduals roundtrip_residuals(const ProductMeasure& nu, const SkewMeasure& mu,
                                       const MapFamily& family, const FiniteKernel& dual);

}  // namespace markiter
