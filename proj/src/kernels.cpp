#include "markiter/kernels.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "markiter/errors.hpp"

namespace markiter {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kNullSpaceTol = 1e-9;
constexpr double kPowerTol = 1e-13;
constexpr long kPowerCap = 1000000;

}  // namespace

FiniteKernel::FiniteKernel(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  const size_t k = rows_.size();
  if (k == 0) throw std::invalid_argument("FiniteKernel: no rows");
  for (size_t i = 0; i < k; ++i) {
    if (rows_[i].size() != k)
      throw ShapeMismatch("FiniteKernel: row " + std::to_string(i) + " has " +
                          std::to_string(rows_[i].size()) + " entries, expected " +
                          std::to_string(k));
    double sum = 0.0;
    for (double v : rows_[i]) {
      if (v < 0.0) throw std::invalid_argument("FiniteKernel: negative entry in row " + std::to_string(i));
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw std::invalid_argument("FiniteKernel: row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
  }
}

FiniteKernel FiniteKernel::from_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return FiniteKernel(std::move(rows));
}

StationaryVector::StationaryVector(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw std::invalid_argument("StationaryVector: empty");
  double sum = 0.0;
  for (double& v : w_) {
    if (v < -1e-12) throw std::invalid_argument("StationaryVector: negative weight");
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("StationaryVector: weights sum to " + std::to_string(sum));
  for (double& v : w_) v /= sum;
}

double StationaryVector::residual_against(const FiniteKernel& p) const {
  if (p.size() != size()) throw ShapeMismatch("residual_against: size mismatch");
  double worst = 0.0;
  for (int j = 0; j < size(); ++j) {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += w_[static_cast<size_t>(i)] * p(i, j);
    worst = std::max(worst, std::abs(s - w_[static_cast<size_t>(j)]));
  }
  return worst;
}

StationaryVector stationary_distribution(const FiniteKernel& p) {
  const int k = p.size();
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(j, i) = p(i, j) - (i == j ? 1.0 : 0.0);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (k >= 2 && sv(k - 2) < kNullSpaceTol)
    throw NonUniqueStationary("numerical null space of (P^T - I) has dimension > 1 "
                              "(second-smallest singular value " +
                              std::to_string(sv(k - 2)) + ")");

  Eigen::VectorXd v = svd.matrixV().col(k - 1);
  double sum = v.sum();
  if (std::abs(sum) < 1e-12)
    throw NonUniqueStationary("null vector of (P^T - I) has zero total mass");
  v /= sum;
  std::vector<double> m(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) m[static_cast<size_t>(i)] = std::max(v(i), 0.0);
  StationaryVector result{std::move(m)};

  if (result.residual_against(p) > 1e-10)
    throw std::runtime_error("stationary solve residual exceeds 1e-10");

  // Power-iteration cross-check from the uniform start. Iterating the
  // half-lazy kernel (P+I)/2 has the same fixed points and cannot cycle on
  // periodic chains.
  std::vector<double> cur(static_cast<size_t>(k), 1.0 / k), nxt(static_cast<size_t>(k));
  for (long it = 0; it < kPowerCap; ++it) {
    double step = 0.0;
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += cur[static_cast<size_t>(i)] * p(i, j);
      nxt[static_cast<size_t>(j)] = 0.5 * (s + cur[static_cast<size_t>(j)]);
      step = std::max(step, std::abs(nxt[static_cast<size_t>(j)] - cur[static_cast<size_t>(j)]));
    }
    cur.swap(nxt);
    if (step < kPowerTol) {
      for (int i = 0; i < k; ++i)
        if (std::abs(cur[static_cast<size_t>(i)] - result[i]) > 1e-8)
          throw std::runtime_error("power-iteration cross-check disagrees with direct solve");
      break;
    }
  }
  return result;
}

FiniteKernel dual_kernel(const FiniteKernel& p, const StationaryVector& m) {
  const int k = p.size();
  if (m.size() != k) throw ShapeMismatch("dual_kernel: size mismatch");
  for (int i = 0; i < k; ++i)
    if (m[i] == 0.0) throw ZeroMassState("dual_kernel: state " + std::to_string(i) + " has zero mass");
  std::vector<std::vector<double>> q(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(k)));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) q[static_cast<size_t>(i)][static_cast<size_t>(j)] = (m[j] / m[i]) * p(j, i);
  return FiniteKernel(std::move(q));
}

BoundedPair boundedness_constant(const FiniteKernel& p, const StationaryVector& m) {
  const int k = p.size();
  if (m.size() != k) throw ShapeMismatch("boundedness_constant: size mismatch");
  std::vector<std::vector<double>> density(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(k)));
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (p(a, b) == 0.0)
        throw NotBounded("boundedness_constant: p(" + std::to_string(a) + "," +
                         std::to_string(b) + ") = 0, density vanishes");
      if (m[b] == 0.0) throw ZeroMassState("boundedness_constant: zero-mass state");
      const double d = p(a, b) / m[b];
      density[static_cast<size_t>(a)][static_cast<size_t>(b)] = d;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  double c = std::min(lo, 1.0 / hi);
  if (c > 1.0) c = 1.0;
  return BoundedPair{p, m, c, std::move(density)};
}

double duality_residual(const FiniteKernel& p, const FiniteKernel& q,
                        const StationaryVector& m) {
  const int k = p.size();
  if (q.size() != k || m.size() != k) throw ShapeMismatch("duality_residual: size mismatch");
  double worst = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      worst = std::max(worst, std::abs(m[i] * p(i, j) - m[j] * q(j, i)));
  return worst;
}

double duality_identity_residual(const FiniteKernel& p, const FiniteKernel& q,
                                 const StationaryVector& m,
                                 const std::vector<std::vector<double>>& kappa) {
  const int k = p.size();
  if (q.size() != k || m.size() != k || static_cast<int>(kappa.size()) != k)
    throw ShapeMismatch("duality_identity_residual: size mismatch");
  double lhs = 0.0, rhs = 0.0;
  for (int a = 0; a < k; ++a) {
    if (static_cast<int>(kappa[static_cast<size_t>(a)].size()) != k)
      throw ShapeMismatch("duality_identity_residual: kappa row size");
    for (int b = 0; b < k; ++b) {
      lhs += kappa[static_cast<size_t>(a)][static_cast<size_t>(b)] * p(a, b) * m[a];
      rhs += kappa[static_cast<size_t>(b)][static_cast<size_t>(a)] * q(a, b) * m[a];
    }
  }
  return std::abs(lhs - rhs);
}

}  // namespace markiter
