#pragma once

#include <cstdint>
#include <limits>

namespace sparsepr {

// Seedable generator with 64 bits of state (SplitMix64, Steele/Lea/Flood 2014).
// Output sequence is fixed for all platforms and versions; every random quantity
// in the library is drawn from one of these.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_{seed} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state() const noexcept { return state_; }

private:
  std::uint64_t state_;
};

/// Independent sub-streams of a trial seed.
enum class Stream : std::uint64_t {
  signal = 1,
  measurement = 2,
};

/// Counter-based seed derivation:
///   key  = mix(seed + (stream + 1) * 0x9E3779B97F4A7C15)
///   sub  = mix(key ^ mix(index + 0xD1B54A32D192ED03))
/// Measurement row j uses index = j, so any row can be regenerated on its own.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(SplitMix64 &gen) noexcept;

/// Uniform integer in [0, bound) by rejection (no modulo bias). bound must be > 0.
std::uint64_t uniform_below(SplitMix64 &gen, std::uint64_t bound) noexcept;

// Standard normal sampler, Marsaglia polar method. Pairs are produced together and
// the second value is cached, so the output depends only on the generator stream.
class NormalSampler {
public:
  double operator()(SplitMix64 &gen) noexcept;

private:
  double cached_ = 0.0;
  bool has_cached_ = false;
};

} // namespace sparsepr
