#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace daisy {

// Dense bit array over 64-bit words. No compression, no atomics: build is
// single-writer, reads after freezing are safe from any number of threads.
class BitArray {
 public:
  explicit BitArray(std::uint64_t nbits)
      : nbits_(nbits), words_((nbits + 63) / 64, 0) {
    if (nbits == 0) throw std::invalid_argument("BitArray: zero length");
  }

  void set(std::uint64_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }

  bool test(std::uint64_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  std::uint64_t popcount() const {
    std::uint64_t c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  std::uint64_t size_bits() const { return nbits_; }
  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

 private:
  std::uint64_t nbits_;
  std::vector<std::uint64_t> words_;
};

}  // namespace daisy
