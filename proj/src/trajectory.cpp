#include "markiter/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "markiter/errors.hpp"

namespace markiter {

namespace {

constexpr long kEnumerationCap = 1000000;

long ipow(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Markov weight of a word: m_{w0} * prod p(w_i, w_{i+1}).
double word_weight(const FiniteKernel& p, const StationaryVector& m, const std::vector<int>& w) {
  double weight = m[w.front()];
  for (size_t i = 0; i + 1 < w.size(); ++i) weight *= p(w[i], w[i + 1]);
  return weight;
}

// Enumerate words of fixed length in lexicographic order.
bool next_word(std::vector<int>& w, int k) {
  for (size_t i = w.size(); i-- > 0;) {
    if (++w[i] < k) return true;
    w[i] = 0;
  }
  return false;
}

}  // namespace

std::vector<int> sample_chain(const FiniteKernel& p, const ChainStart& start, long n,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_chain: n must be >= 1");
  SplitMix64 rng(seed);
  std::vector<int> states(static_cast<size_t>(n));
  if (std::holds_alternative<int>(start)) {
    const int s = std::get<int>(start);
    if (s < 0 || s >= p.size()) throw std::invalid_argument("sample_chain: start state out of range");
    states[0] = s;
  } else {
    const auto& m = std::get<StationaryVector>(start);
    if (m.size() != p.size()) throw ShapeMismatch("sample_chain: start vector size mismatch");
    states[0] = sample_index(rng, m.weights());
  }
  for (long i = 1; i < n; ++i)
    states[static_cast<size_t>(i)] = sample_index(rng, p.row(states[static_cast<size_t>(i) - 1]));
  return states;
}

OrbitSample iterate(const MapFamily& family, std::vector<int> states, double x0,
                    std::uint64_t seed) {
  OrbitSample orbit;
  orbit.seed = seed;
  orbit.states = std::move(states);
  orbit.points.resize(orbit.states.size() + 1);
  orbit.points[0] = wrap_unit(x0);
  for (size_t i = 0; i < orbit.states.size(); ++i) {
    const int s = orbit.states[i];
    if (s < 0 || s >= family.size()) throw std::invalid_argument("iterate: state index out of range");
    orbit.points[i + 1] = family[s].apply(CirclePoint(orbit.points[i])).pos;
  }
  return orbit;
}

double birkhoff_average(const OrbitSample& orbit, int grid_n,
                        const std::function<double(int, int)>& phi) {
  const long n = orbit.steps();
  if (n < 1) throw std::invalid_argument("birkhoff_average: empty orbit");
  double sum = 0.0;
  for (long i = 1; i <= n; ++i)
    sum += phi(orbit.z_state(i), GridMeasure::bin_of(orbit.z_point(i), grid_n));
  return sum / static_cast<double>(n);
}

double integrate(const ProductMeasure& nu, const std::function<double(int, int)>& phi) {
  double sum = 0.0;
  for (int a = 0; a < nu.states(); ++a) {
    const double w = nu.marginal[a];
    if (w == 0.0) continue;
    const auto& g = nu.disintegration[static_cast<size_t>(a)];
    for (int b = 0; b < nu.grid(); ++b) sum += w * g[b] * phi(a, b);
  }
  return sum;
}

ProductMeasure empirical_product_measure(const FiniteKernel& p, const MapFamily& family,
                                         const ChainStart& start, int trials, long n,
                                         long burn_in, int grid_n, std::uint64_t seed) {
  if (burn_in >= n) throw std::invalid_argument("empirical_product_measure: burn_in must be < n");
  const int k = p.size();
  std::vector<std::vector<double>> counts(static_cast<size_t>(k),
                                          std::vector<double>(static_cast<size_t>(grid_n), 0.0));
  std::vector<double> state_counts(static_cast<size_t>(k), 0.0);
  for (int t = 0; t < trials; ++t) {
    SplitMix64 point_rng = stream_for(seed, 2 * static_cast<std::uint64_t>(t) + 1);
    const auto states = sample_chain(p, start, n, stream_for(seed, 2 * static_cast<std::uint64_t>(t)).next());
    const OrbitSample orbit = iterate(family, states, point_rng.uniform(), seed);
    for (long i = std::max(burn_in, 1L); i <= orbit.steps(); ++i) {
      const int a = orbit.z_state(i);
      const int b = GridMeasure::bin_of(orbit.z_point(i), grid_n);
      counts[static_cast<size_t>(a)][static_cast<size_t>(b)] += 1.0;
      state_counts[static_cast<size_t>(a)] += 1.0;
    }
  }
  double total = 0.0;
  for (double c : state_counts) total += c;
  if (!(total > 0.0)) throw std::invalid_argument("empirical_product_measure: no samples collected");

  std::vector<double> marginal(static_cast<size_t>(k));
  std::vector<GridMeasure> parts;
  parts.reserve(static_cast<size_t>(k));
  for (int a = 0; a < k; ++a) {
    marginal[static_cast<size_t>(a)] = state_counts[static_cast<size_t>(a)] / total;
    if (state_counts[static_cast<size_t>(a)] > 0.0)
      parts.push_back(GridMeasure::from_weights(counts[static_cast<size_t>(a)]));
    else
      parts.push_back(GridMeasure::uniform(grid_n));
  }
  return ProductMeasure(StationaryVector(std::move(marginal)), std::move(parts));
}

double check_shift_duality(const FiniteKernel& p, const FiniteKernel& q,
                           const StationaryVector& m, const std::vector<double>& g,
                           const std::function<double(const std::vector<int>&)>& u, int len_l) {
  const int k = p.size();
  if (static_cast<int>(g.size()) != k) throw ShapeMismatch("check_shift_duality: g size mismatch");
  if (len_l < 0) throw std::invalid_argument("check_shift_duality: L must be >= 0");
  if (ipow(k, len_l + 2) > kEnumerationCap)
    throw TooLarge("check_shift_duality: k^(L+2) exceeds the enumeration cap");

  const int word_len = len_l + 2;
  std::vector<int> w(static_cast<size_t>(word_len), 0);
  std::vector<int> head(static_cast<size_t>(len_l + 1));
  double lhs = 0.0, rhs = 0.0;
  do {
    const double weight = word_weight(p, m, w);
    if (weight == 0.0) continue;
    // u at the shifted word: coordinates w_1 .. w_{L+1}
    for (int i = 0; i <= len_l; ++i) head[static_cast<size_t>(i)] = w[static_cast<size_t>(i) + 1];
    lhs += weight * u(head) * g[static_cast<size_t>(w[0])];
    // u at the word itself, g summed against the dual row of w_0
    for (int i = 0; i <= len_l; ++i) head[static_cast<size_t>(i)] = w[static_cast<size_t>(i)];
    double gq = 0.0;
    for (int b = 0; b < k; ++b) gq += g[static_cast<size_t>(b)] * q(w[0], b);
    rhs += weight * u(head) * gq;
  } while (next_word(w, k));
  return std::abs(lhs - rhs);
}

ConditionalBoundResult check_conditional_bound(const BoundedPair& pair, const MapFamily& family,
                                               const CylinderBinIndicator& h, double x0, int n) {
  const int k = pair.kernel.size();
  const int len_l = h.word_len;
  const int grid_n = h.grid_n;
  if (family.size() != k) throw ShapeMismatch("check_conditional_bound: family size mismatch");
  if (n < 1 || len_l < 1) throw std::invalid_argument("check_conditional_bound: need n >= 1 and L >= 1");
  if (ipow(k, n + len_l) > kEnumerationCap)
    throw TooLarge("check_conditional_bound: k^(n+L) exceeds the enumeration cap");
  const long words_l = ipow(k, len_l);
  if (static_cast<long>(h.table.size()) != words_l * grid_n)
    throw ShapeMismatch("check_conditional_bound: indicator table size mismatch");

  // Hypothesis h >= h o F on the cylinder/bin structure: for every
  // (L+1)-word w and bin b, h(w_0..w_{L-1}, b) must dominate
  // h(w_1..w_L, b') on every bin b' the image arc of b under f_{w_0} covers.
  {
    std::vector<BinPushforward> tables;
    tables.reserve(static_cast<size_t>(k));
    for (int a = 0; a < k; ++a) tables.emplace_back(family[a], grid_n);
    std::vector<int> w(static_cast<size_t>(len_l) + 1, 0);
    do {
      long prefix = 0, suffix = 0;
      for (int i = 0; i < len_l; ++i) {
        prefix = prefix * k + w[static_cast<size_t>(i)];
        suffix = suffix * k + w[static_cast<size_t>(i) + 1];
      }
      for (int b = 0; b < grid_n; ++b) {
        if (h.value(prefix, b)) continue;
        for (int covered : tables[static_cast<size_t>(w[0])].covered_bins(b)) {
          if (h.value(suffix, covered))
            throw HypothesisFailed("check_conditional_bound: h < h o F at a word/bin pair");
        }
      }
    } while (next_word(w, k));
  }

  const auto& p = pair.kernel;
  const auto& m = pair.stationary;

  // cond(a, b) = sum over L-words w of p(a, w_0) prod p * h(w, b)
  // hbar(b)    = sum over L-words w of m_{w_0}  prod p * h(w, b)
  std::vector<double> cond(static_cast<size_t>(k) * static_cast<size_t>(grid_n), 0.0);
  std::vector<double> hbar(static_cast<size_t>(grid_n), 0.0);
  {
    std::vector<int> w(static_cast<size_t>(len_l), 0);
    long widx = 0;
    do {
      double tail = 1.0;
      for (size_t i = 0; i + 1 < w.size(); ++i) tail *= p(w[i], w[i + 1]);
      for (int b = 0; b < grid_n; ++b) {
        if (!h.value(widx, b)) continue;
        hbar[static_cast<size_t>(b)] += m[w[0]] * tail;
        for (int a = 0; a < k; ++a)
          cond[static_cast<size_t>(a) * static_cast<size_t>(grid_n) + static_cast<size_t>(b)] += p(a, w[0]) * tail;
      }
      ++widx;
    } while (next_word(w, k));
  }

  // Enumerate prefix atoms; the phase point after n steps is determined by
  // the atom, so the slack depends only on (last state, bin).
  double margin = std::numeric_limits<double>::infinity();
  std::vector<int> atom(static_cast<size_t>(n), 0);
  do {
    const double weight = word_weight(p, m, atom);
    if (weight == 0.0) continue;
    double x = wrap_unit(x0);
    for (int i = 0; i < n; ++i) x = family[atom[static_cast<size_t>(i)]].apply(CirclePoint(x)).pos;
    const int b = GridMeasure::bin_of(x, grid_n);
    const int last = atom[static_cast<size_t>(n) - 1];
    const double slack =
        cond[static_cast<size_t>(last) * static_cast<size_t>(grid_n) + static_cast<size_t>(b)] -
        pair.constant_C * hbar[static_cast<size_t>(b)];
    margin = std::min(margin, slack);
  } while (next_word(atom, k));

  if (!std::isfinite(margin)) margin = 0.0;  // no positive-mass atom
  return ConditionalBoundResult{margin >= 0.0, margin};
}

}  // namespace markiter
