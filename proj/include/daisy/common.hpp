#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>

namespace daisy {

using element_id = std::uint32_t;

// log2(e); converts natural-log space formulas to bits.
inline constexpr double kLog2E = std::numbers::log2e_v<double>;

// Largest universe the enumeration-based measurements will accept.
inline constexpr std::uint64_t kMaxEnumerableUniverse = std::uint64_t{1} << 24;

// Malformed input files / tables (bad header, duplicate ids, unparsable rows).
class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Compensated (Neumaier) summation. Weighted sums over large universes must
// not lose mass to cancellation; the normalization invariants are 1e-9 tight.
class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// All CSV output uses 12 significant digits so runs diff cleanly.
inline std::string fmt12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace daisy
