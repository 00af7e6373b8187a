#pragma once

#include <cstdint>
#include <random>

namespace aoi {

// One stream per simulation run; never shared between threads.
using Rng = std::mt19937_64;

inline constexpr const char* kRngName = "mt19937_64";

// Uniform on [0, 1) with 53 random bits. Spelled out instead of
// std::uniform_real_distribution so streams are identical across standard
// library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1]; safe to pass to log().
inline double uniform_open_zero(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace aoi
