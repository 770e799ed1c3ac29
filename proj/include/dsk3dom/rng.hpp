#pragma once

#include <cmath>
#include <cstdint>

#include "dsk3dom/types.hpp"

namespace dsk3dom::rng {

// Stateless counter-based generator built on the splitmix64 finalizer.
// Every draw is a pure function of (seed, step, stream, index, lane), so
// randomized stages can run in parallel and still replay bit-identically.

inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t step, std::uint64_t stream,
                         std::uint64_t index, std::uint64_t lane) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ step);
  h = mix(h ^ stream);
  h = mix(h ^ index);
  return mix(h ^ lane);
}

/// Uniform in [0, 1), 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t step, std::uint64_t stream,
                        std::uint64_t index, std::uint64_t lane) {
  return static_cast<double>(key(seed, step, stream, index, lane) >> 11) * 0x1.0p-53;
}

/// Standard normal pair via Box-Muller; u1 is shifted into (0, 1].
inline void normal_pair(std::uint64_t seed, std::uint64_t step, std::uint64_t stream,
                        std::uint64_t index, std::uint64_t lane, double& z0, double& z1) {
  const double u1 = 1.0 - uniform01(seed, step, stream, index, lane);
  const double u2 = uniform01(seed, step, stream, index, lane + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(2.0 * M_PI * u2);
  z1 = r * std::sin(2.0 * M_PI * u2);
}

/// Three i.i.d. standard normals (consumes lanes [lane, lane+4)).
inline Vec3 normal3(std::uint64_t seed, std::uint64_t step, std::uint64_t stream,
                    std::uint64_t index, std::uint64_t lane) {
  double a, b, c, d;
  normal_pair(seed, step, stream, index, lane, a, b);
  normal_pair(seed, step, stream, index, lane + 2, c, d);
  return Vec3(a, b, c);
}

}  // namespace dsk3dom::rng
