/**
 * Deterministic random source.
 *
 * splitmix64 used directly as the generator: the sequence is pinned by the
 * algorithm itself, not by a standard-library distribution, so identical
 * seeds give identical streams on every platform and compiler. All
 * randomness in the project flows through this type.
 */

#ifndef CTMAP_RNG_HPP
#define CTMAP_RNG_HPP

#include <cstdint>

namespace ctmap::rng {

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform in [0, n), unbiased via rejection. n must be > 0.
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % n;
  }

  bool bernoulli(double p) { return next_double() < p; }

  /// Independent child stream; deriving with distinct tags never aliases the
  /// parent sequence.
  Rng split(uint64_t tag) const {
    return Rng(mix64(state_ ^ mix64(tag + 0x9e3779b97f4a7c15ULL)));
  }

 private:
  uint64_t state_;
};

/// Stable per-item seed derivation (trip i of a corpus, jitter attempt k...).
inline uint64_t derive_seed(uint64_t master, uint64_t tag) {
  return mix64(master ^ mix64(tag + 0x9e3779b97f4a7c15ULL));
}

}  // namespace ctmap::rng

#endif  // CTMAP_RNG_HPP
