#pragma once

#include <cstdint>
#include <span>

namespace markiter {

// Counter-based 64-bit generator (SplitMix64): the state is a plain counter
// advanced by a fixed odd increment, the output is a bijective finalizer of
// the counter. Streams for parallel trials are derived by hashing
// (master_seed, stream_index), so workers never share state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent stream for trial `index` under a master seed.
inline SplitMix64 stream_for(std::uint64_t master_seed, std::uint64_t index) {
  return SplitMix64(mix64(master_seed ^ mix64(index + 0x9e3779b97f4a7c15ULL)));
}

// Draw an index from a probability vector by CDF walk. Weights are assumed
// to sum to 1 up to rounding; the last positive-weight index absorbs the tail.
inline int sample_index(SplitMix64& rng, std::span<const double> weights) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    if (weights[i] > 0.0) last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace markiter
