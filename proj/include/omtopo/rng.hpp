#pragma once

#include <cstdint>

namespace omtopo {

// Counter-based draws: offset i of a given seed is produced from its own
// splitmix64-mixed word, so a realization does not depend on evaluation
// order or on how many draws precede it.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i) noexcept {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

inline double uniform01(std::uint64_t seed, std::uint64_t i) noexcept {
  return static_cast<double>(mix_seed(seed, i) >> 11) * 0x1p-53;
}

// uniform in [-half_width, +half_width)
inline double uniform_sym(std::uint64_t seed, std::uint64_t i,
                          double half_width) noexcept {
  return -half_width + (2.0 * half_width) * uniform01(seed, i);
}

}  // namespace omtopo
