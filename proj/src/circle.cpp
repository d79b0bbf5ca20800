#include "markiter/circle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "markiter/errors.hpp"

namespace markiter {

namespace {
constexpr double kPi = 3.14159265358979323846;
// Below this arc length the lift difference loses precision; switch to the
// derivative when updating log-lengths.
constexpr double kShortArc = 1e-8;
}  // namespace

Arc::Arc(CirclePoint s, double len) : start(s), length(len) {
  if (!(len >= 0.0 && len <= 1.0))
    throw std::invalid_argument("Arc: length " + std::to_string(len) + " outside [0,1]");
}

CircleMap CircleMap::rotation(double angle) {
  CircleMap f;
  f.kind_ = Kind::Rotation;
  f.angle_ = angle;
  return f;
}

CircleMap CircleMap::projective(const std::array<std::array<double, 2>, 2>& matrix) {
  const double det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
  if (!(det > 0.0))
    throw std::invalid_argument("CircleMap::projective: determinant must be positive");
  CircleMap f;
  f.kind_ = Kind::Projective;
  const double s = 1.0 / std::sqrt(det);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) f.a_[static_cast<size_t>(i)][static_cast<size_t>(j)] = matrix[static_cast<size_t>(i)][static_cast<size_t>(j)] * s;
  return f;
}

CircleMap CircleMap::piecewise_linear(std::vector<double> breaks, std::vector<double> images) {
  if (breaks.empty() || breaks.size() != images.size())
    throw std::invalid_argument("CircleMap::piecewise_linear: breaks/images size mismatch");
  for (size_t i = 0; i < breaks.size(); ++i) {
    if (breaks[i] < 0.0 || breaks[i] >= 1.0)
      throw std::invalid_argument("CircleMap::piecewise_linear: breakpoints must lie in [0,1)");
    if (i > 0 && !(breaks[i] > breaks[i - 1]))
      throw std::invalid_argument("CircleMap::piecewise_linear: breakpoints must be strictly increasing");
    if (i > 0 && !(images[i] > images[i - 1]))
      throw std::invalid_argument("CircleMap::piecewise_linear: images must be strictly increasing");
  }
  if (!(images.back() < images.front() + 1.0))
    throw std::invalid_argument("CircleMap::piecewise_linear: period closure needs images.back() < images.front() + 1");
  CircleMap f;
  f.kind_ = Kind::PiecewiseLinear;
  f.breaks_ = std::move(breaks);
  f.images_ = std::move(images);
  return f;
}

double CircleMap::chart_angle(double x) const {
  const double psi = kPi * x;
  const double ux = std::cos(psi), uy = std::sin(psi);
  const double wx = a_[0][0] * ux + a_[0][1] * uy;
  const double wy = a_[1][0] * ux + a_[1][1] * uy;
  return wrap_unit(std::atan2(wy, wx) / kPi);
}

CirclePoint CircleMap::apply(CirclePoint x) const {
  switch (kind_) {
    case Kind::Rotation:
      return CirclePoint(x.pos + angle_);
    case Kind::Projective:
      return CirclePoint(chart_angle(x.pos));
    case Kind::PiecewiseLinear:
      return CirclePoint(lift(x.pos));
  }
  return x;
}

double CircleMap::lift(double x) const {
  const double base = std::floor(x);
  const double t = x - base;
  switch (kind_) {
    case Kind::Rotation:
      return x + angle_;
    case Kind::Projective: {
      const double raw0 = chart_angle(0.0);
      double delta = chart_angle(t) - raw0;
      if (delta < 0.0) delta += 1.0;
      return base + raw0 + delta;
    }
    case Kind::PiecewiseLinear: {
      const size_t r = breaks_.size();
      double x0, x1, y0, y1;
      if (t < breaks_.front()) {
        x0 = breaks_.back() - 1.0;
        y0 = images_.back() - 1.0;
        x1 = breaks_.front();
        y1 = images_.front();
      } else {
        size_t i = static_cast<size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin()) - 1;
        x0 = breaks_[i];
        y0 = images_[i];
        if (i + 1 < r) {
          x1 = breaks_[i + 1];
          y1 = images_[i + 1];
        } else {
          x1 = breaks_.front() + 1.0;
          y1 = images_.front() + 1.0;
        }
      }
      return base + y0 + (t - x0) * (y1 - y0) / (x1 - x0);
    }
  }
  return x;
}

double CircleMap::image_length(double x, double len) const {
  if (len <= 0.0) return 0.0;
  if (len >= 1.0) return 1.0;
  switch (kind_) {
    case Kind::Rotation:
      return len;  // isometry, exact
    case Kind::Projective: {
      const double t0 = chart_angle(wrap_unit(x));
      const double t1 = chart_angle(wrap_unit(x + len));
      double d = t1 - t0;
      if (d < 0.0) d += 1.0;
      return d;
    }
    case Kind::PiecewiseLinear: {
      double d = lift(x + len) - lift(x);
      return std::clamp(d, 0.0, 1.0);
    }
  }
  return len;
}

double CircleMap::derivative(CirclePoint x) const {
  switch (kind_) {
    case Kind::Rotation:
      return 1.0;
    case Kind::Projective: {
      // Angle derivative of the projective action: det(A) / |A u|^2 with
      // det normalized to 1.
      const double psi = kPi * x.pos;
      const double ux = std::cos(psi), uy = std::sin(psi);
      const double wx = a_[0][0] * ux + a_[0][1] * uy;
      const double wy = a_[1][0] * ux + a_[1][1] * uy;
      return 1.0 / (wx * wx + wy * wy);
    }
    case Kind::PiecewiseLinear: {
      const double t = wrap_unit(x.pos);
      double x0, x1, y0, y1;
      const size_t r = breaks_.size();
      if (t < breaks_.front()) {
        x0 = breaks_.back() - 1.0;
        y0 = images_.back() - 1.0;
        x1 = breaks_.front();
        y1 = images_.front();
      } else {
        size_t i = static_cast<size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin()) - 1;
        x0 = breaks_[i];
        y0 = images_[i];
        if (i + 1 < r) {
          x1 = breaks_[i + 1];
          y1 = images_[i + 1];
        } else {
          x1 = breaks_.front() + 1.0;
          y1 = images_.front() + 1.0;
        }
      }
      return (y1 - y0) / (x1 - x0);
    }
  }
  return 1.0;
}

double CircleMap::log_length_ratio(double x, double log_len) const {
  if (kind_ == Kind::Rotation) return 0.0;
  const double len = std::exp(log_len);
  if (len > kShortArc) {
    const double img = image_length(x, len);
    if (img > 0.0) return std::log(img) - log_len;
  }
  return std::log(derivative(CirclePoint(x)));
}

Arc apply_arc(const CircleMap& f, const Arc& a) {
  return Arc(f.apply(a.start), f.image_length(a.start.pos, a.length));
}

double derivative(const CircleMap& f, CirclePoint x) { return f.derivative(x); }

BinPushforward::BinPushforward(const CircleMap& f, int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("BinPushforward: grid size must be positive");
  offsets_.assign(static_cast<size_t>(n) + 1, 0);
  const double inv_n = 1.0 / n;
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    const double x = i * inv_n;
    const double start = f.apply(CirclePoint(x)).pos;
    const double len = f.image_length(x, inv_n);
    if (len <= 0.0) {
      row.emplace_back(GridMeasure::bin_of(start, n), 1.0);
    } else {
      const double s = start * n;
      const double e = s + len * n;
      const long first = static_cast<long>(std::floor(s));
      double total = 0.0;
      for (long b = first; b < e; ++b) {
        const double lo = std::max(s, static_cast<double>(b));
        const double hi = std::min(e, static_cast<double>(b + 1));
        const double w = hi - lo;
        if (w <= 0.0) continue;
        int target = static_cast<int>(b % n);
        if (target < 0) target += n;
        row.emplace_back(target, w);
        total += w;
      }
      if (row.empty()) {
        row.emplace_back(GridMeasure::bin_of(start, n), 1.0);
      } else {
        for (auto& [t, w] : row) w /= total;
      }
    }
    offsets_[static_cast<size_t>(i) + 1] = offsets_[static_cast<size_t>(i)] + static_cast<int>(row.size());
    for (auto& [t, w] : row) {
      targets_.push_back(t);
      fractions_.push_back(w);
    }
  }
}

GridMeasure BinPushforward::apply(const GridMeasure& mu) const {
  if (mu.size() != n_) throw ShapeMismatch("BinPushforward::apply: grid size mismatch");
  std::vector<double> out(static_cast<size_t>(n_), 0.0);
  accumulate(mu.weights(), 1.0, out);
  return GridMeasure::from_weights(std::move(out));
}

void BinPushforward::accumulate(const std::vector<double>& in, double scale,
                                std::vector<double>& out) const {
  for (int i = 0; i < n_; ++i) {
    const double m = scale * in[static_cast<size_t>(i)];
    if (m == 0.0) continue;
    for (int e = offsets_[static_cast<size_t>(i)]; e < offsets_[static_cast<size_t>(i) + 1]; ++e)
      out[static_cast<size_t>(targets_[static_cast<size_t>(e)])] += m * fractions_[static_cast<size_t>(e)];
  }
}

std::vector<int> BinPushforward::covered_bins(int source) const {
  std::vector<int> bins(targets_.begin() + offsets_[static_cast<size_t>(source)],
                        targets_.begin() + offsets_[static_cast<size_t>(source) + 1]);
  std::sort(bins.begin(), bins.end());
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  return bins;
}

GridMeasure pushforward(const CircleMap& f, const GridMeasure& mu) {
  return BinPushforward(f, mu.size()).apply(mu);
}

double common_invariant_residual(const MapFamily& family,
                                 const std::vector<double>& support_weights,
                                 const GridMeasure& mu) {
  if (static_cast<int>(support_weights.size()) != family.size())
    throw ShapeMismatch("common_invariant_residual: weights/family size mismatch");
  double worst = 0.0;
  for (int a = 0; a < family.size(); ++a) {
    if (support_weights[static_cast<size_t>(a)] <= 0.0) continue;
    worst = std::max(worst, tv_distance(pushforward(family[a], mu), mu));
  }
  return worst;
}

InvariantSearch detect_common_invariant(const MapFamily& family,
                                        const std::vector<double>& support_weights,
                                        int grid_n, double tol, long max_iter) {
  if (static_cast<int>(support_weights.size()) != family.size())
    throw ShapeMismatch("detect_common_invariant: weights/family size mismatch");
  std::vector<BinPushforward> tables;
  tables.reserve(static_cast<size_t>(family.size()));
  for (int a = 0; a < family.size(); ++a) tables.emplace_back(family[a], grid_n);

  GridMeasure cur = GridMeasure::uniform(grid_n);
  long it = 0;
  for (; it < max_iter; ++it) {
    std::vector<double> acc(static_cast<size_t>(grid_n), 0.0);
    for (int a = 0; a < family.size(); ++a) {
      if (support_weights[static_cast<size_t>(a)] == 0.0) continue;
      tables[static_cast<size_t>(a)].accumulate(cur.weights(), support_weights[static_cast<size_t>(a)], acc);
    }
    GridMeasure next = GridMeasure::from_weights(std::move(acc));
    const double change = tv_distance(next, cur);
    cur = std::move(next);
    if (change < tol) {
      ++it;
      break;
    }
  }

  double residual = 0.0;
  for (int a = 0; a < family.size(); ++a) {
    if (support_weights[static_cast<size_t>(a)] <= 0.0) continue;
    residual = std::max(residual, tv_distance(tables[static_cast<size_t>(a)].apply(cur), cur));
  }
  return InvariantSearch{residual < 10.0 * tol, residual, std::move(cur), it};
}

}  // namespace markiter
