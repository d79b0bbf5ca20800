#include "markiter/grid_measure.hpp"

#include <cmath>
#include <stdexcept>

#include "markiter/errors.hpp"

namespace markiter {

GridMeasure::GridMeasure(std::vector<double> weights) : bins_(std::move(weights)) {
  if (bins_.empty()) throw std::invalid_argument("GridMeasure: empty weight vector");
  double sum = 0.0;
  for (double& w : bins_) {
    if (w < -1e-12) throw std::invalid_argument("GridMeasure: negative weight");
    if (w < 0.0) w = 0.0;
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("GridMeasure: weights sum to " + std::to_string(sum));
  for (double& w : bins_) w /= sum;
}

GridMeasure GridMeasure::from_weights(std::vector<double> raw) {
  double sum = 0.0;
  for (double w : raw) {
    if (w < 0.0) throw std::invalid_argument("GridMeasure::from_weights: negative weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("GridMeasure::from_weights: zero total mass");
  for (double& w : raw) w /= sum;
  return GridMeasure(std::move(raw), unchecked_tag{});
}

GridMeasure GridMeasure::uniform(int n) {
  return GridMeasure(std::vector<double>(static_cast<size_t>(n), 1.0 / n), unchecked_tag{});
}

GridMeasure GridMeasure::point_mass(int n, int bin) {
  std::vector<double> w(static_cast<size_t>(n), 0.0);
  w.at(static_cast<size_t>(bin)) = 1.0;
  return GridMeasure(std::move(w), unchecked_tag{});
}

int GridMeasure::bin_of(double x, int n) {
  int b = static_cast<int>(std::floor(x * n));
  if (b < 0) b = 0;
  if (b >= n) b = n - 1;
  return b;
}

double GridMeasure::sample_point(SplitMix64& rng) const {
  const int b = sample_index(rng, bins_);
  return (b + rng.uniform()) / size();
}

double tv_distance(const GridMeasure& a, const GridMeasure& b) {
  if (a.size() != b.size())
    throw ShapeMismatch("tv_distance: grids of size " + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace markiter
