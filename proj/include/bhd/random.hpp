#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace bhd {

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Counter-based SplitMix64 generator: the k-th output (k = 0, 1, ...) is
/// splitmix64_mix(key + (k + 1) * golden_gamma). Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> if needed, but the
/// library only uses the explicit helpers below so that streams are
/// bit-identical across standard library implementations.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += kGoldenGamma;
    return splitmix64_mix(state_);
  }

private:
  std::uint64_t state_;
};

/// Derives an independent stream key from a root seed and two indices.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  std::uint64_t k = splitmix64_mix(seed ^ 0x6A09E667F3BCC908ULL);
  k = splitmix64_mix(k + (a + 1) * kGoldenGamma);
  k = splitmix64_mix(k ^ ((b + 1) * 0xD1B54A32D192ED03ULL));
  return k;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(SplitMix64& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1].
inline double uniform01_open_low(SplitMix64& rng) noexcept {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection, n > 0.
inline std::uint64_t uniform_index(SplitMix64& rng, std::uint64_t n) noexcept {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

/// Standard normal deviates by the Box-Muller transform; caches the second
/// deviate of each pair.
class GaussianSource {
public:
  explicit GaussianSource(std::uint64_t key) noexcept : rng_(key) {}

  double operator()() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open_low(rng_);
    const double u2 = uniform01(rng_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  SplitMix64& engine() noexcept { return rng_; }

private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bhd
