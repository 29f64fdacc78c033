#pragma once

#include <cstdint>

namespace daisy {

// SplitMix64 (Steele, Lea, Flood 2014). Every random decision in the library
// flows through this generator so that runs reproduce bit-for-bit from a
// 64-bit seed, in any language with wrapping 64-bit arithmetic.
struct SplitMix64 {
  std::uint64_t state;

  constexpr explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  constexpr std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1): top 53 bits of the next output.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace daisy
