#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "markiter/circle.hpp"
#include "markiter/kernels.hpp"
#include "markiter/measure.hpp"
#include "markiter/rng.hpp"

namespace markiter {

// Start law for the driving chain: a fixed state or a probability vector.
using ChainStart = std::variant<int, StationaryVector>;

// A driving word together with the phase orbit it generates. The skew-chain
// samples are the pairs Z_i = (states[i-1], points[i]) for i >= 1.
struct OrbitSample {
  std::uint64_t seed = 0;
  std::vector<int> states;     // w_0 .. w_{n-1}
  std::vector<double> points;  // x_0, f(x_0), .. , n+1 values

  long steps() const { return static_cast<long>(states.size()); }
  int z_state(long i) const { return states[static_cast<size_t>(i - 1)]; }
  double z_point(long i) const { return points[static_cast<size_t>(i)]; }
};

// Sample n steps of the driving chain; deterministic given the seed.
std::vector<int> sample_chain(const FiniteKernel& p, const ChainStart& start, long n,
                              std::uint64_t seed);

OrbitSample iterate(const MapFamily& family, std::vector<int> states, double x0,
                    std::uint64_t seed = 0);

// (1/n) sum_{i=1..n} phi(Z_i) with phi read on the (state, bin) alphabet.
double birkhoff_average(const OrbitSample& orbit, int grid_n,
                        const std::function<double(int, int)>& phi);

// sum over states and bins of phi(a, b) m_a nu_a(b); the oracle side of the
// Birkhoff comparison.
double integrate(const ProductMeasure& nu, const std::function<double(int, int)>& phi);

// Histogram of the skew-chain samples over [burn_in, n), pooled across
// trials: per-state histograms normalized, marginal = empirical state
// frequency. States never visited get a uniform placeholder disintegration.
ProductMeasure empirical_product_measure(const FiniteKernel& p, const MapFamily& family,
                                         const ChainStart& start, int trials, long n,
                                         long burn_in, int grid_n, std::uint64_t seed);

// Exact enumeration of E[u(shifted word) g(w_0)] vs
// E[u(word) sum_b g(b) q(w_0,b)] over all words of length L+2 under the
// Markov weights; returns the absolute difference. u reads the first L+1
// coordinates of its argument.
double check_shift_duality(const FiniteKernel& p, const FiniteKernel& q,
                           const StationaryVector& m, const std::vector<double>& g,
                           const std::function<double(const std::vector<int>&)>& u, int len_l);

// 0/1 table over (length-L words) x bins, the finite stand-in for an
// indicator measurable in the first L coordinates and the grid.
struct CylinderBinIndicator {
  int word_len = 0;
  int grid_n = 0;
  std::vector<std::uint8_t> table;  // size k^L * grid_n, word-major

  bool value(long word_index, int bin) const {
    return table[static_cast<size_t>(word_index) * static_cast<size_t>(grid_n) + static_cast<size_t>(bin)] != 0;
  }
};

struct ConditionalBoundResult {
  bool holds = false;
  double margin = 0.0;  // smallest slack over positive-mass atoms
};

// Exact check of the conditional lower bound
//   E( h(F^n(., x0)) | first n coordinates ) >= C * hbar(phase point)
// on every prefix atom of positive mass. Requires h >= h o F, verified by
// enumeration over (L+1)-words and bin image covers.
ConditionalBoundResult check_conditional_bound(const BoundedPair& pair, const MapFamily& family,
                                               const CylinderBinIndicator& h, double x0, int n);

}  // namespace markiter
