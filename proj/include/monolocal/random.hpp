#pragma once

#include <cmath>
#include <numbers>
#include <random>

namespace monolocal {

// Distributions written out by hand: the standard library's are allowed to
// differ between implementations, and seeded runs must match everywhere.

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller; consumes exactly two draws.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace monolocal
