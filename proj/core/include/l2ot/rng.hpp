#pragma once

#include <cstdint>
#include <random>

namespace l2ot {

// std::mt19937_64 output is fully specified by the standard; the distribution
// adaptors are not. These two helpers replace them so seeded draws are
// reproducible across compilers and platforms.

/// Unbiased integer in [0, bound), bound >= 1.
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

}  // namespace l2ot
