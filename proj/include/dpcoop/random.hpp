#ifndef DPCOOP_RANDOM_HPP
#define DPCOOP_RANDOM_HPP

#include <cstdint>
#include <random>

namespace dpcoop {

using Rng = std::mt19937_64;

// 53-bit uniform in [0,1). Spelled out so streams are identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double prob) { return uniform01(rng) < prob; }

// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

}  // namespace dpcoop

#endif  // DPCOOP_RANDOM_HPP
