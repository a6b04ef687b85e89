#include "sparsepr/rng.hpp"

#include <cmath>

namespace sparsepr {

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept
{
  auto const tag = static_cast<std::uint64_t>(stream);
  std::uint64_t const key = SplitMix64::mix(seed + (tag + 1) * 0x9E3779B97F4A7C15ULL);
  return SplitMix64::mix(key ^ SplitMix64::mix(index + 0xD1B54A32D192ED03ULL));
}

double uniform01(SplitMix64 &gen) noexcept
{
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(SplitMix64 &gen, std::uint64_t bound) noexcept
{
  // largest multiple of bound representable; draws at or above it are rejected
  std::uint64_t const limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t r;
  do {
    r = gen();
  } while (r >= limit);
  return r % bound;
}

double NormalSampler::operator()(SplitMix64 &gen) noexcept
{
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01(gen) - 1.0;
    v = 2.0 * uniform01(gen) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double const factor = std::sqrt(-2.0 * std::log(s) / s);
  cached_ = v * factor;
  has_cached_ = true;
  return u * factor;
}

} // namespace sparsepr
