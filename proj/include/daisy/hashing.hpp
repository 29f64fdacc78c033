#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "daisy/prng.hpp"

namespace daisy {

// 128-bit keyed hash of an element id: the first two outputs of a SplitMix64
// stream whose initial state is seed XOR (x * 0x9E3779B97F4A7C15). g2 is
// forced odd for the double-hashing step below.
struct Hash128 {
  std::uint64_t g1;
  std::uint64_t g2;
};

inline Hash128 element_hash(std::uint64_t seed, std::uint64_t x) {
  SplitMix64 gen(seed ^ (x * 0x9E3779B97F4A7C15ULL));
  const std::uint64_t g1 = gen.next();
  const std::uint64_t g2 = gen.next() | 1ULL;
  return {g1, g2};
}

// The i-th probe (i >= 1) for element x is (g1 + i*g2) mod m, with g1 + i*g2
// evaluated in wrapping 64-bit arithmetic. Probes for k' <= k are a prefix of
// the probes for k, which is what lets per-element hash counts vary freely.
struct HashSequence {
  std::uint64_t seed;
  std::uint64_t m;

  std::uint64_t position(std::uint64_t x, std::uint64_t i) const {
    const Hash128 h = element_hash(seed, x);
    return (h.g1 + i * h.g2) % m;
  }
};

inline std::vector<std::uint64_t> positions(std::uint64_t seed, std::uint64_t x,
                                            std::uint64_t k, std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("positions: modulus must be >= 1");
  const Hash128 h = element_hash(seed, x);
  std::vector<std::uint64_t> out;
  out.reserve(k);
  for (std::uint64_t i = 1; i <= k; ++i) out.push_back((h.g1 + i * h.g2) % m);
  return out;
}

}  // namespace daisy
