#pragma once

#include <cmath>
#include <cstdint>

namespace lft {

// Counter-based random numbers: every variate is a pure function of
// (seed, stream, counter, sub), so replicas parallelize without shared state
// and mode-indexed normals make spectral truncations exact prefixes.
namespace rng {

inline std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash4(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter, std::uint64_t sub) {
  std::uint64_t x = mix64(seed ^ 0x5851f42d4c957f2dULL);
  x = mix64(x ^ stream);
  x = mix64(x ^ counter);
  x = mix64(x ^ sub);
  return mix64(x);
}

// uniform in (0,1), 53-bit mantissa, never exactly 0
inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t counter, std::uint64_t sub) {
  const std::uint64_t bits = hash4(seed, stream, counter, sub);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// k-th standard normal of substream (seed, stream) via Box-Muller
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t counter, std::uint64_t sub = 0) {
  const double u1 = uniform(seed, stream, counter, 2 * sub);
  const double u2 = uniform(seed, stream, counter, 2 * sub + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace rng

// A handle on one substream; normals are random-access by counter.
struct NormalStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double normal(std::uint64_t counter, std::uint64_t sub = 0) const {
    return rng::normal(seed, stream, counter, sub);
  }
};

}  // namespace lft
