#pragma once

#include <cstdint>
#include <random>

namespace wildgen {

/// The single engine type used everywhere; libstdc++'s mt19937_64 and its
/// distributions are deterministic for a given seed.
using Rng = std::mt19937_64;

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

inline double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng);
}

}  // namespace wildgen
