#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace ssx {

// Counter-based deterministic RNG (SplitMix64 run in counter mode).
//
// Draw i of stream (seed, stream) is
//   mix(base + (i+1) * GOLDEN),  base = mix(seed + (stream+1) * GOLDEN)
// where mix is the SplitMix64 finalizer. Every draw is a pure function of
// (seed, stream, i), so sequences are reproducible on any platform and any
// draw can be recomputed from its index alone.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : base_(mix(seed + (stream + 1) * kGolden)) {}

  static constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t at(uint64_t i) const { return mix(base_ + (i + 1) * kGolden); }
  uint64_t next() { return at(counter_++); }
  uint64_t counter() const { return counter_; }

  // Uniform in [0,1), 53-bit resolution.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased (Lemire's multiply-shift rejection).
  uint64_t below(uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next()) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return unit() < p; }

  // Standard normal via Box-Muller; consumes exactly two draws.
  double normal() {
    double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Random permutation of {0..n-1}.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

 private:
  uint64_t base_;
  uint64_t counter_ = 0;
};

}  // namespace ssx
