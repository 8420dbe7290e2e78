#pragma once

#include <cstdint>

namespace csbm {

// SplitMix64 stream keyed by a 64-bit seed. derive(tag) hashes the original
// seed with a stream tag, so independent sampling stages (parent graph,
// child subsampling, permutation, cleanup shuffles, ...) draw from unrelated
// streams regardless of evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound), unbiased via rejection. bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  Rng derive(std::uint64_t tag) const { return Rng(mix(seed_, tag)); }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

// Stream tags for the sampling stages of a correlated pair.
enum : std::uint64_t {
  kStreamParent = 1,
  kStreamChildA = 2,
  kStreamChildB = 3,
  kStreamPermutation = 4,
  kStreamMatcher = 5,
  kStreamSelection = 6,
};

}  // namespace csbm
