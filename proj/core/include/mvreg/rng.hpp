#ifndef MVREG_RNG_HPP
#define MVREG_RNG_HPP

#include <cmath>
#include <cstdint>

namespace mvreg::rng {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so sampling is reproducible independent of call
// order, thread count, or platform RNG library. Streams keep draws made from
// the same user seed statistically independent.

inline constexpr std::uint64_t kStreamTwist = 0x74776973;
inline constexpr std::uint64_t kStreamSecondView = 0x32766965;
inline constexpr std::uint64_t kStreamPhantom = 0x7068616e;
inline constexpr std::uint64_t kStreamMultistart = 0x6d737274;

/// splitmix64 finalizer.
inline std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t x = mix(seed + golden);
  x = mix(x + stream + golden);
  x = mix(x + counter + golden);
  return x;
}

/// Uniform draw in (0, 1].
inline double uniform01(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t counter) {
  const std::uint64_t bits = hash3(seed, stream, counter) >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller; consumes counters 2k and 2k+1.
inline double standard_normal(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) {
  const double u1 = uniform01(seed, stream, 2 * index);
  const double u2 = uniform01(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace mvreg::rng

#endif  // MVREG_RNG_HPP
