#pragma once

#include <cstdint>
#include <random>

namespace mswap {

/// SplitMix64 finalizer (Steele, Lea, Flood). Used as the fixed address
/// mixer for phase signatures, so the constants must never change.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Seedable uniform source. mt19937_64 is fully specified by the standard,
/// and the double conversion below is done by hand because
/// std::uniform_real_distribution is not portable across standard libraries.
class UniformSource {
public:
  explicit UniformSource(std::uint64_t seed = 1) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    // Lemire-style rejection keeps the result unbiased.
    const std::uint64_t limit = (~bound + 1) % bound;
    std::uint64_t r = engine_();
    while (r < limit) {
      r = engine_();
    }
    return r % bound;
  }

  bool next_bernoulli(double p) { return next_unit() < p; }

private:
  std::mt19937_64 engine_;
};

} // namespace mswap
