#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace stoknap {

// Seed derivation for independent substreams. Child seeds are pure
// functions of (parent seed, tags), so two pipelines that share a master
// seed draw identical randomness for identical (tag...) keys regardless
// of call order. This is what makes phantom/real couplings exact.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t parent, uint64_t tag) {
  return splitmix64(parent ^ (0x517cc1b727220a95ULL * (tag + 1)));
}

inline uint64_t derive_seed(uint64_t parent, uint64_t a, uint64_t b) {
  return derive_seed(derive_seed(parent, a), b);
}

inline uint64_t derive_seed(uint64_t parent, uint64_t a, uint64_t b, uint64_t c) {
  return derive_seed(derive_seed(parent, a, b), c);
}

// Deterministic random stream: SplitMix64 run as a counter-based
// generator. Construction is two integer ops, which matters because the
// samplers key a fresh stream off (seed, item, t) for every proposal.
// The double conversion is pinned (no std::uniform_real_distribution).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in {0, ..., n-1}; n >= 1.
  uint64_t next_below(uint64_t n) {
    // rejection sampling, unbiased and deterministic
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  uint64_t state_;
};

// Draws an index from a discrete distribution given cumulative weights
// (non-decreasing, last element ~1). Returns the first index whose
// cumulative weight exceeds the draw.
inline size_t sample_cumulative(Rng& rng, const std::vector<double>& cum) {
  const double u = rng.next_double();
  for (size_t k = 0; k + 1 < cum.size(); ++k) {
    if (u < cum[k]) return k;
  }
  return cum.empty() ? 0 : cum.size() - 1;
}

}  // namespace stoknap
