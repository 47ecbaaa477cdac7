#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace nqnet {

/// Seed streams. Every run derives its independent generators from one
/// 64-bit seed plus one of these tags, so that changing e.g. the shuffle
/// order never perturbs the sampled data or the initial weights.
enum class Stream : std::uint64_t {
  kData = 1,
  kValidation = 2,
  kInit = 3,
  kShuffle = 4,
  kTest = 5,
  kReplicate = 6,
  kCollect = 7,
  kRollout = 8,
};

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for (parent, index). Pure; used for both stream tags and
/// replicate / iteration indices.
inline constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                           std::uint64_t index) noexcept {
  return splitmix64_mix(splitmix64_mix(parent) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream s) noexcept {
  return derive_seed(parent, static_cast<std::uint64_t>(s) << 32);
}

/// Counter-based generator: the n-th output is mix(seed + n * golden).
/// Satisfies UniformRandomBitGenerator so it can drive <random>
/// distributions, but the helpers below avoid them where bit-exact
/// portability matters (uniforms and normals).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return splitmix64_mix(seed_ + 0x9e3779b97f4a7c15ULL * counter_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform01() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). Slight modulo bias is irrelevant for the
  /// n used here (< 2^32).
  std::uint64_t below(std::uint64_t n) noexcept { return (*this)() % n; }

  /// Standard normal via Box-Muller (one output per call).
  double normal() noexcept {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace nqnet
