#pragma once

#include <cstdint>
#include <vector>

#include "markiter/rng.hpp"

namespace markiter {

// Probability weights over N circle bins [i/N, (i+1)/N). The discrete
// stand-in for a probability measure on S^1 = R/Z.
class GridMeasure {
 public:
  // Validating constructor: weights must be >= -1e-12 elementwise and sum to
  // 1 within 1e-12. Tiny negatives are clamped and the vector is rescaled to
  // sum exactly 1.
  explicit GridMeasure(std::vector<double> weights);

  // Normalizes any nonnegative vector with positive total mass.
  static GridMeasure from_weights(std::vector<double> raw);
  static GridMeasure uniform(int n);
  static GridMeasure point_mass(int n, int bin);

  int size() const { return static_cast<int>(bins_.size()); }
  double operator[](int i) const { return bins_[static_cast<size_t>(i)]; }
  const std::vector<double>& weights() const { return bins_; }

  // Bin index of a circle point in [0,1).
  static int bin_of(double x, int n);

  // Sample a point: pick a bin by weight, then uniform within the bin.
  double sample_point(SplitMix64& rng) const;

 private:
  struct unchecked_tag {};
  GridMeasure(std::vector<double> weights, unchecked_tag) : bins_(std::move(weights)) {}
  std::vector<double> bins_;
};

// Total variation distance: half the l1 distance between weight vectors.
double tv_distance(const GridMeasure& a, const GridMeasure& b);

}  // namespace markiter
