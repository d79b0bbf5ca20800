#pragma once

#include <vector>

#include "markiter/circle.hpp"
#include "markiter/grid_measure.hpp"
#include "markiter/kernels.hpp"

namespace markiter {

// Measure on E x S^1 stored as first marginal m plus per-state
// disintegration {nu_a}. nu(A x B) = sum_{a in A} m_a nu_a(B).
struct ProductMeasure {
  StationaryVector marginal;
  std::vector<GridMeasure> disintegration;

  ProductMeasure(StationaryVector m, std::vector<GridMeasure> parts);
  int states() const { return marginal.size(); }
  int grid() const { return disintegration.front().size(); }

  static ProductMeasure uniform(const StationaryVector& m, int grid_n);
};

// Measure on sequence-space x S^1 whose disintegration depends only on the
// zeroth coordinate: base m plus the family {mu_a}.
struct SkewMeasure {
  StationaryVector base;
  std::vector<GridMeasure> family;

  SkewMeasure(StationaryVector m, std::vector<GridMeasure> parts);
  int states() const { return base.size(); }
  int grid() const { return family.front().size(); }
};

// max_a TV(a_parts[a], b_parts[a])
double max_state_tv(const std::vector<GridMeasure>& a, const std::vector<GridMeasure>& b);

// The Markov operator of the skew chain on measures with first marginal m,
// in its two algebraically equal forms:
//   direct:    (Pnu)_b = sum_a (m_a p_ab / m'_b) f_b # nu_a,  m'_b = sum_a m_a p_ab
//   dual form: (Pnu)_a = sum_b q_ab f_a # nu_b
// Pushforward tables are built once per (family, grid) and reused.
class MarkovOperator {
 public:
  MarkovOperator(const BoundedPair& pair, const FiniteKernel& dual, const MapFamily& family, int grid_n);

  ProductMeasure direct(const ProductMeasure& nu) const;
  ProductMeasure dual_form(const ProductMeasure& nu) const;

  const BoundedPair& pair() const { return pair_; }
  const FiniteKernel& dual_kernel_matrix() const { return dual_; }
  int grid() const { return grid_n_; }

  // sum_b q_ab f_a # nu_b per state a; the right-hand side of the
  // stationarity characterization.
  std::vector<GridMeasure> stationarity_rhs(const ProductMeasure& nu) const;
  // sum_b q_ab f_b # mu_b per state a; the right-hand side of the
  // skew-invariance characterization (pushforward index is b, not a).
  std::vector<GridMeasure> skew_invariance_rhs(const SkewMeasure& mu) const;

 private:
  BoundedPair pair_;
  FiniteKernel dual_;
  std::vector<BinPushforward> tables_;
  int grid_n_;
};

ProductMeasure markov_operator_direct(const BoundedPair& pair, const MapFamily& family,
                                      const ProductMeasure& nu);
ProductMeasure markov_operator_dual(const BoundedPair& pair, const FiniteKernel& dual,
                                    const MapFamily& family, const ProductMeasure& nu);

double stationarity_residual(const BoundedPair& pair, const FiniteKernel& dual,
                             const MapFamily& family, const ProductMeasure& nu);
double skew_invariance_residual(const BoundedPair& pair, const FiniteKernel& dual,
                                const MapFamily& family, const SkewMeasure& mu);

// Projection to the circle factor: sum_a m_a nu_a.
GridMeasure phase_marginal(const ProductMeasure& nu);

struct SolveResult {
  ProductMeasure measure;  // last iterate
  ProductMeasure cesaro;   // running average of iterates; the meaningful
                           // object when the iteration only accumulates
  double residual = 0.0;   // last step change, max-state TV
  long iterations = 0;
  bool converged = false;
};

// Iterate the direct operator until the per-state TV step change drops below
// tol. Non-convergence is reported in the result (residual + Cesaro average
// preserved), never swallowed.
SolveResult fixed_point_stationary(const BoundedPair& pair, const FiniteKernel& dual,
                                   const MapFamily& family, const ProductMeasure& init,
                                   double tol, long max_iter);

struct SandwichResult {
  bool holds = false;
  double worst_slack = 0.0;  // negative = violation amount
};

// Check C mu_a(b) <= (phase marginal of nu)(b) <= C^{-1} mu_a(b) for every
// state a and bin b, with 1e-12 slack.
SandwichResult sandwich_check(const ProductMeasure& nu, const SkewMeasure& mu, double c);

}  // namespace markiter
