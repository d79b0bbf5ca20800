#include "markiter/measure.hpp"

#include <cmath>
#include <stdexcept>

#include "markiter/errors.hpp"

namespace markiter {

namespace {

void check_same_grid(const std::vector<GridMeasure>& parts) {
  for (const auto& g : parts)
    if (g.size() != parts.front().size())
      throw ShapeMismatch("disintegration members use different grids");
}

}  // namespace

ProductMeasure::ProductMeasure(StationaryVector m, std::vector<GridMeasure> parts)
    : marginal(std::move(m)), disintegration(std::move(parts)) {
  if (static_cast<int>(disintegration.size()) != marginal.size())
    throw ShapeMismatch("ProductMeasure: marginal size " + std::to_string(marginal.size()) +
                        " vs " + std::to_string(disintegration.size()) + " disintegration members");
  check_same_grid(disintegration);
}

ProductMeasure ProductMeasure::uniform(const StationaryVector& m, int grid_n) {
  std::vector<GridMeasure> parts(static_cast<size_t>(m.size()), GridMeasure::uniform(grid_n));
  return ProductMeasure(m, std::move(parts));
}

SkewMeasure::SkewMeasure(StationaryVector m, std::vector<GridMeasure> parts)
    : base(std::move(m)), family(std::move(parts)) {
  if (static_cast<int>(family.size()) != base.size())
    throw ShapeMismatch("SkewMeasure: base size vs family size");
  check_same_grid(family);
}

double max_state_tv(const std::vector<GridMeasure>& a, const std::vector<GridMeasure>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("max_state_tv: state count mismatch");
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, tv_distance(a[i], b[i]));
  return worst;
}

MarkovOperator::MarkovOperator(const BoundedPair& pair, const FiniteKernel& dual,
                               const MapFamily& family, int grid_n)
    : pair_(pair), dual_(dual), grid_n_(grid_n) {
  const int k = pair_.kernel.size();
  if (dual_.size() != k || family.size() != k)
    throw ShapeMismatch("MarkovOperator: kernel/dual/family sizes disagree");
  tables_.reserve(static_cast<size_t>(k));
  for (int a = 0; a < k; ++a) tables_.emplace_back(family[a], grid_n);
}

ProductMeasure MarkovOperator::direct(const ProductMeasure& nu) const {
  const int k = pair_.kernel.size();
  if (nu.states() != k || nu.grid() != grid_n_)
    throw ShapeMismatch("MarkovOperator::direct: measure shape mismatch");
  const auto& p = pair_.kernel;
  const auto& m = pair_.stationary;
  std::vector<GridMeasure> out;
  out.reserve(static_cast<size_t>(k));
  for (int b = 0; b < k; ++b) {
    // mix in state space first, push through f_b once
    double mass = 0.0;
    std::vector<double> mixed(static_cast<size_t>(grid_n_), 0.0);
    for (int a = 0; a < k; ++a) {
      const double w = m[a] * p(a, b);
      if (w == 0.0) continue;
      mass += w;
      const auto& src = nu.disintegration[static_cast<size_t>(a)].weights();
      for (int i = 0; i < grid_n_; ++i) mixed[static_cast<size_t>(i)] += w * src[static_cast<size_t>(i)];
    }
    if (mass <= 0.0)
      throw std::invalid_argument("markov_operator_direct: state " + std::to_string(b) +
                                  " is unreachable under m");
    std::vector<double> pushed(static_cast<size_t>(grid_n_), 0.0);
    tables_[static_cast<size_t>(b)].accumulate(mixed, 1.0 / mass, pushed);
    out.push_back(GridMeasure::from_weights(std::move(pushed)));
  }
  return ProductMeasure(nu.marginal, std::move(out));  // first marginal preserved bit-for-bit
}

ProductMeasure MarkovOperator::dual_form(const ProductMeasure& nu) const {
  return ProductMeasure(nu.marginal, stationarity_rhs(nu));
}

std::vector<GridMeasure> MarkovOperator::stationarity_rhs(const ProductMeasure& nu) const {
  const int k = pair_.kernel.size();
  if (nu.states() != k || nu.grid() != grid_n_)
    throw ShapeMismatch("stationarity_rhs: measure shape mismatch");
  std::vector<GridMeasure> out;
  out.reserve(static_cast<size_t>(k));
  for (int a = 0; a < k; ++a) {
    std::vector<double> mixed(static_cast<size_t>(grid_n_), 0.0);
    for (int b = 0; b < k; ++b) {
      const double w = dual_(a, b);
      if (w == 0.0) continue;
      const auto& src = nu.disintegration[static_cast<size_t>(b)].weights();
      for (int i = 0; i < grid_n_; ++i) mixed[static_cast<size_t>(i)] += w * src[static_cast<size_t>(i)];
    }
    std::vector<double> pushed(static_cast<size_t>(grid_n_), 0.0);
    tables_[static_cast<size_t>(a)].accumulate(mixed, 1.0, pushed);
    out.push_back(GridMeasure::from_weights(std::move(pushed)));
  }
  return out;
}

std::vector<GridMeasure> MarkovOperator::skew_invariance_rhs(const SkewMeasure& mu) const {
  const int k = pair_.kernel.size();
  if (mu.states() != k || mu.grid() != grid_n_)
    throw ShapeMismatch("skew_invariance_rhs: measure shape mismatch");
  // push each mu_b through its own f_b once, then mix rows of q
  std::vector<std::vector<double>> pushed(static_cast<size_t>(k),
                                          std::vector<double>(static_cast<size_t>(grid_n_), 0.0));
  for (int b = 0; b < k; ++b)
    tables_[static_cast<size_t>(b)].accumulate(mu.family[static_cast<size_t>(b)].weights(), 1.0,
                                               pushed[static_cast<size_t>(b)]);
  std::vector<GridMeasure> out;
  out.reserve(static_cast<size_t>(k));
  for (int a = 0; a < k; ++a) {
    std::vector<double> mixed(static_cast<size_t>(grid_n_), 0.0);
    for (int b = 0; b < k; ++b) {
      const double w = dual_(a, b);
      if (w == 0.0) continue;
      for (int i = 0; i < grid_n_; ++i)
        mixed[static_cast<size_t>(i)] += w * pushed[static_cast<size_t>(b)][static_cast<size_t>(i)];
    }
    out.push_back(GridMeasure::from_weights(std::move(mixed)));
  }
  return out;
}

ProductMeasure markov_operator_direct(const BoundedPair& pair, const MapFamily& family,
                                      const ProductMeasure& nu) {
  return MarkovOperator(pair, dual_kernel(pair.kernel, pair.stationary), family, nu.grid())
      .direct(nu);
}

ProductMeasure markov_operator_dual(const BoundedPair& pair, const FiniteKernel& dual,
                                    const MapFamily& family, const ProductMeasure& nu) {
  return MarkovOperator(pair, dual, family, nu.grid()).dual_form(nu);
}

double stationarity_residual(const BoundedPair& pair, const FiniteKernel& dual,
                             const MapFamily& family, const ProductMeasure& nu) {
  MarkovOperator op(pair, dual, family, nu.grid());
  return max_state_tv(nu.disintegration, op.stationarity_rhs(nu));
}

double skew_invariance_residual(const BoundedPair& pair, const FiniteKernel& dual,
                                const MapFamily& family, const SkewMeasure& mu) {
  MarkovOperator op(pair, dual, family, mu.grid());
  return max_state_tv(mu.family, op.skew_invariance_rhs(mu));
}

GridMeasure phase_marginal(const ProductMeasure& nu) {
  std::vector<double> acc(static_cast<size_t>(nu.grid()), 0.0);
  for (int a = 0; a < nu.states(); ++a) {
    const double w = nu.marginal[a];
    const auto& src = nu.disintegration[static_cast<size_t>(a)].weights();
    for (int i = 0; i < nu.grid(); ++i) acc[static_cast<size_t>(i)] += w * src[static_cast<size_t>(i)];
  }
  return GridMeasure::from_weights(std::move(acc));
}

SolveResult fixed_point_stationary(const BoundedPair& pair, const FiniteKernel& dual,
                                   const MapFamily& family, const ProductMeasure& init,
                                   double tol, long max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("fixed_point_stationary: tol must be positive");
  MarkovOperator op(pair, dual, family, init.grid());

  const int k = init.states();
  const int n = init.grid();
  std::vector<std::vector<double>> cesaro_acc(static_cast<size_t>(k),
                                              std::vector<double>(static_cast<size_t>(n), 0.0));
  ProductMeasure cur = init;
  double residual = 0.0;
  long it = 0;
  bool converged = false;
  while (it < max_iter) {
    ProductMeasure next = op.direct(cur);
    ++it;
    for (int a = 0; a < k; ++a) {
      const auto& w = next.disintegration[static_cast<size_t>(a)].weights();
      for (int i = 0; i < n; ++i) cesaro_acc[static_cast<size_t>(a)][static_cast<size_t>(i)] += w[static_cast<size_t>(i)];
    }
    residual = max_state_tv(next.disintegration, cur.disintegration);
    cur = std::move(next);
    if (residual < tol) {
      converged = true;
      break;
    }
  }

  std::vector<GridMeasure> cesaro;
  cesaro.reserve(static_cast<size_t>(k));
  for (int a = 0; a < k; ++a) cesaro.push_back(GridMeasure::from_weights(cesaro_acc[static_cast<size_t>(a)]));
  return SolveResult{std::move(cur), ProductMeasure(init.marginal, std::move(cesaro)),
                     residual, it, converged};
}

SandwichResult sandwich_check(const ProductMeasure& nu, const SkewMeasure& mu, double c) {
  if (nu.states() != mu.states() || nu.grid() != mu.grid())
    throw ShapeMismatch("sandwich_check: shape mismatch");
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument("sandwich_check: C must lie in (0,1]");
  const GridMeasure pm = phase_marginal(nu);
  double worst = std::numeric_limits<double>::infinity();
  for (int a = 0; a < mu.states(); ++a) {
    const auto& fam = mu.family[static_cast<size_t>(a)];
    for (int b = 0; b < mu.grid(); ++b) {
      worst = std::min(worst, pm[b] - c * fam[b]);
      worst = std::min(worst, fam[b] / c - pm[b]);
    }
  }
  return SandwichResult{worst >= -1e-12, worst};
}

}  // namespace markiter
