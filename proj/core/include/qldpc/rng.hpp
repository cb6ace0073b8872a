#pragma once

#include <cstdint>
#include <random>

namespace qldpc {

/// splitmix64 finalizer; used to derive well-separated substream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x51ed2701ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

// Thin wrapper around mt19937_64 that avoids std distributions: their output
// is implementation-defined, and datasets must be byte-identical across
// toolchains for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, bound). Rejection sampling, bound >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % bound;
  }

  /// Fisher-Yates shuffle.
  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace qldpc
