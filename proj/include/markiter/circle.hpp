#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "markiter/grid_measure.hpp"

namespace markiter {

// Reduce to [0,1); the circle is R/Z.
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return (r >= 1.0) ? r - 1.0 : r;
}

struct CirclePoint {
  double pos = 0.0;  // in [0,1)
  explicit CirclePoint(double x = 0.0) : pos(wrap_unit(x)) {}
};

// Oriented arc [start, start+length) of length in [0,1]. The diameter is the
// length of the smaller of the two arcs between the endpoints.
struct Arc {
  CirclePoint start;
  double length = 0.0;
  Arc(CirclePoint s, double len);
  double diameter() const { return std::min(length, 1.0 - length); }
};

// Orientation-preserving circle homeomorphism. Three variants:
//   Rotation     x -> x + angle
//   Projective   positive-determinant 2x2 matrix acting on RP^1, identified
//                with S^1 through the chart x = (line angle)/pi; determinant
//                is renormalized to 1 on construction
//   PiecewiseLinear  monotone lift interpolating (break_i, image_i), with
//                image_0 + 1 closing the period
class CircleMap {
 public:
  enum class Kind { Rotation, Projective, PiecewiseLinear };

  static CircleMap rotation(double angle);
  static CircleMap projective(const std::array<std::array<double, 2>, 2>& matrix);
  static CircleMap piecewise_linear(std::vector<double> breaks, std::vector<double> images);
  static CircleMap identity() { return rotation(0.0); }

  Kind kind() const { return kind_; }

  CirclePoint apply(CirclePoint x) const;

  // Monotone lift, lift(x+1) = lift(x) + 1.
  double lift(double x) const;

  // Length of the image of the arc [x, x+len): lift(x+len) - lift(x).
  // Exact for rotations.
  double image_length(double x, double len) const;

  // Derivative of the lift (right-hand slope at piecewise-linear breaks).
  double derivative(CirclePoint x) const;

  // log(image_length / len) for the arc [x, x+exp(log_len)); switches to the
  // derivative once the arc is too short for the lift difference to carry
  // precision. Exactly 0 for rotations.
  double log_length_ratio(double x, double log_len) const;

 private:
  CircleMap() = default;
  Kind kind_ = Kind::Rotation;
  double angle_ = 0.0;                       // Rotation
  std::array<std::array<double, 2>, 2> a_{}; // Projective, det normalized to 1
  std::vector<double> breaks_, images_;      // PiecewiseLinear
  double chart_angle(double x) const;        // Projective: image angle / pi in [0,1)
};

Arc apply_arc(const CircleMap& f, const Arc& a);
double derivative(const CircleMap& f, CirclePoint x);

// Family {f_a} indexed like the driving kernel's states.
class MapFamily {
 public:
  explicit MapFamily(std::vector<CircleMap> maps) : maps_(std::move(maps)) {}
  int size() const { return static_cast<int>(maps_.size()); }
  const CircleMap& operator[](int i) const { return maps_[static_cast<size_t>(i)]; }

 private:
  std::vector<CircleMap> maps_;
};

// Grid transfer of a single map: each source bin's mass is spread over the
// bins covered by its image arc, proportionally to overlap length. Sparse
// row table, reusable across many measures.
class BinPushforward {
 public:
  BinPushforward(const CircleMap& f, int n);

  GridMeasure apply(const GridMeasure& mu) const;
  // out += scale * push(in); raw weight vectors of size n.
  void accumulate(const std::vector<double>& in, double scale, std::vector<double>& out) const;
  // Target bins that receive mass from source bin i.
  std::vector<int> covered_bins(int source) const;

  int size() const { return n_; }

 private:
  int n_;
  std::vector<int> offsets_;    // CSR offsets, size n+1
  std::vector<int> targets_;
  std::vector<double> fractions_;
};

GridMeasure pushforward(const CircleMap& f, const GridMeasure& mu);

// max over states with positive weight of TV(f_a # mu, mu).
double common_invariant_residual(const MapFamily& family,
                                 const std::vector<double>& support_weights,
                                 const GridMeasure& mu);

struct InvariantSearch {
  bool found = false;
  double residual = 0.0;
  GridMeasure witness;
  long iterations = 0;
};

// Fixed-point search for a measure invariant under every map of the family:
// iterate mu <- sum_a w_a f_a # mu from uniform. A positive finding is a
// certificate up to grid error; a negative finding is evidence only.
InvariantSearch detect_common_invariant(const MapFamily& family,
                                        const std::vector<double>& support_weights,
                                        int grid_n, double tol, long max_iter);

}  // namespace markiter
