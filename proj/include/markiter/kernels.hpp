#pragma once

#include <string>
#include <vector>

namespace markiter {

// Row-stochastic transition matrix on a finite driving space of k states.
// Row i is the transition law p(i, .). Rows are stored as given: no silent
// renormalization, so algebraic identities between a kernel and its dual
// survive at machine precision.
class FiniteKernel {
 public:
  explicit FiniteKernel(std::vector<std::vector<double>> rows);

  int size() const { return static_cast<int>(rows_.size()); }
  double operator()(int i, int j) const { return rows_[static_cast<size_t>(i)][static_cast<size_t>(j)]; }
  const std::vector<double>& row(int i) const { return rows_[static_cast<size_t>(i)]; }

  // Plain-text matrix file: one row per line, whitespace-separated entries.
  static FiniteKernel from_text_file(const std::string& path);

 private:
  std::vector<std::vector<double>> rows_;
};

// Probability vector over driving states. The constructor checks only
// simplex membership; stationarity with respect to a specific kernel is the
// contract of stationary_distribution() and can be re-checked with
// residual_against().
class StationaryVector {
 public:
  explicit StationaryVector(std::vector<double> weights);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_[static_cast<size_t>(i)]; }
  const std::vector<double>& weights() const { return w_; }

  // max_j |sum_i w_i p_ij - w_j|
  double residual_against(const FiniteKernel& p) const;

 private:
  std::vector<double> w_;
};

// A kernel together with its stationary vector, the state-to-state density
// k(a,b) = p_ab / m_b, and the pinching constant C with
// C <= k(a,b) <= 1/C for all a, b.
struct BoundedPair {
  FiniteKernel kernel;
  StationaryVector stationary;
  double constant_C = 0.0;
  std::vector<std::vector<double>> density;
};

// Unique stationary vector of P, by direct null-space solve of (P^T - I)
// cross-checked with power iteration. Throws NonUniqueStationary when the
// numerical null space has dimension > 1 (second-smallest singular value of
// P^T - I below 1e-9).
StationaryVector stationary_distribution(const FiniteKernel& p);

// Time-reversed kernel q_ij = (m_j / m_i) p_ji. Requires m_i > 0 for all i.
// Satisfies m_i q_ij = m_j p_ji at machine precision by construction.
FiniteKernel dual_kernel(const FiniteKernel& p, const StationaryVector& m);

// Density k(a,b) = p_ab / m_b and C = min(min k, 1/max k). Throws NotBounded
// when some p_ab = 0.
BoundedPair boundedness_constant(const FiniteKernel& p, const StationaryVector& m);

// max over singleton events of |m_i p_ij - m_j q_ji|; zero exactly when q is
// the dual of p relative to m.
double duality_residual(const FiniteKernel& p, const FiniteKernel& q,
                        const StationaryVector& m);

// |sum_{a,b} kappa(a,b) p_ab m_a - sum_{a,b} kappa(b,a) q_ab m_a| for a
// nonnegative test matrix kappa.
double duality_identity_residual(const FiniteKernel& p, const FiniteKernel& q,
                                 const StationaryVector& m,
                                 const std::vector<std::vector<double>>& kappa);

}  // namespace markiter
