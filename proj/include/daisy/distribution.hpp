#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "daisy/common.hpp"
#include "daisy/prng.hpp"

namespace daisy {

// A finite universe of ids 0..u-1 with an insert distribution P and a query
// distribution Q. Both columns are normalized once at construction and the
// object is immutable afterwards, so it can be shared freely across threads.
//
// Zero probabilities are legal on either side. An element with q = 0 never
// contributes to the false positive rate; an element with p = 0 is never
// drawn into the input set and can only ever be a false positive.
class WeightedUniverse {
 public:
  WeightedUniverse(std::vector<double> p_weights, std::vector<double> q_weights)
      : p_(std::move(p_weights)), q_(std::move(q_weights)) {
    if (p_.empty() || p_.size() != q_.size())
      throw std::invalid_argument("WeightedUniverse: need equal non-empty weight columns");
    normalize(p_, "p");
    normalize(q_, "q");
    build_cdf();
  }

  std::uint64_t size() const { return p_.size(); }
  double p(element_id x) const { return p_[x]; }
  double q(element_id x) const { return q_[x]; }
  std::span<const double> p_all() const { return p_; }
  std::span<const double> q_all() const { return q_; }

  // Inverse CDF of P: the smallest id whose cumulative p-mass exceeds r.
  element_id inverse_cdf(double r) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), r);
    if (it == cdf_.end()) return last_positive_;
    return static_cast<element_id>(it - cdf_.begin());
  }

 private:
  static void normalize(std::vector<double>& w, const char* name) {
    NeumaierSum total;
    for (double v : w) {
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument(std::string("WeightedUniverse: ") + name +
                                    " weights must be finite and >= 0");
      total.add(v);
    }
    const double t = total.value();
    if (t <= 0.0)
      throw std::invalid_argument(std::string("WeightedUniverse: ") + name +
                                  " column has no positive mass");
    for (double& v : w) v /= t;
  }

  void build_cdf() {
    cdf_.resize(p_.size());
    NeumaierSum run;
    double prev = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      run.add(p_[i]);
      prev = std::max(prev, std::min(run.value(), 1.0));
      cdf_[i] = prev;
      if (p_[i] > 0.0) last_positive_ = static_cast<element_id>(i);
    }
    // Pin the tail plateau to exactly 1 so draws in [cdf.back(), 1) cannot
    // select a zero-probability id.
    for (std::size_t i = last_positive_; i < cdf_.size(); ++i) cdf_[i] = 1.0;
  }

  std::vector<double> p_;
  std::vector<double> q_;
  std::vector<double> cdf_;
  element_id last_positive_ = 0;
};

// An input set: n draws from P with replacement, in draw order, plus the
// deduplicated set of distinct ids.
struct SampledSet {
  std::uint64_t universe_size = 0;
  std::vector<element_id> draws;
  std::vector<element_id> distinct;  // sorted, unique
};

inline WeightedUniverse uniform(std::uint64_t u) {
  if (u == 0) throw std::invalid_argument("uniform: universe must be non-empty");
  std::vector<double> w(u, 1.0);
  return WeightedUniverse(w, w);
}

enum class Side { p, q };

// One side gets weight proportional to rank^-s (id 0 is rank 1); the other
// side is copied from `other` or uniform when `other` is null. s = 0 is the
// uniform distribution.
inline WeightedUniverse zipf(std::uint64_t u, double s, Side side,
                             const WeightedUniverse* other = nullptr) {
  if (u == 0) throw std::invalid_argument("zipf: universe must be non-empty");
  if (!(s >= 0.0)) throw std::invalid_argument("zipf: exponent must be >= 0");
  if (other && other->size() != u)
    throw std::invalid_argument("zipf: other universe has mismatched size");
  std::vector<double> skew(u);
  for (std::uint64_t i = 0; i < u; ++i)
    skew[i] = std::pow(static_cast<double>(i + 1), -s);
  std::vector<double> flat(u, 1.0);
  if (other) {
    const auto col = (side == Side::p) ? other->q_all() : other->p_all();
    flat.assign(col.begin(), col.end());
  }
  if (side == Side::p) return WeightedUniverse(std::move(skew), std::move(flat));
  return WeightedUniverse(std::move(flat), std::move(skew));
}

struct WeightRow {
  element_id id;
  double p;
  double q;
};

// Rows may arrive in any order but must cover ids 0..u-1 exactly once.
// Weights need not be normalized.
inline WeightedUniverse from_table(std::span<const WeightRow> rows) {
  if (rows.empty()) throw format_error("from_table: no rows");
  const std::size_t u = rows.size();
  std::vector<double> p(u), q(u);
  std::vector<char> seen(u, 0);
  for (const WeightRow& r : rows) {
    if (r.id >= u) throw format_error("from_table: id " + std::to_string(r.id) +
                                      " outside 0.." + std::to_string(u - 1));
    if (seen[r.id]) throw format_error("from_table: duplicate id " + std::to_string(r.id));
    seen[r.id] = 1;
    p[r.id] = r.p;
    q[r.id] = r.q;
  }
  return WeightedUniverse(std::move(p), std::move(q));
}

// Weights file: header line `id,p,q`, then one `id,p,q` record per line.
inline WeightedUniverse load_weights(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw format_error("weights: empty file");
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  if (line != "id,p,q") throw format_error("weights: expected header 'id,p,q'");
  std::vector<WeightRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    WeightRow r{};
    const char* s = line.c_str();
    const char* end = s + line.size();
    auto [pid, ec1] = std::from_chars(s, end, r.id);
    if (ec1 != std::errc{} || pid == end || *pid != ',')
      throw format_error("weights: bad id at line " + std::to_string(lineno));
    auto [pp, ec2] = std::from_chars(pid + 1, end, r.p);
    if (ec2 != std::errc{} || pp == end || *pp != ',')
      throw format_error("weights: bad p at line " + std::to_string(lineno));
    auto [pq, ec3] = std::from_chars(pp + 1, end, r.q);
    if (ec3 != std::errc{} || pq != end)
      throw format_error("weights: bad q at line " + std::to_string(lineno));
    rows.push_back(r);
  }
  return from_table(rows);
}

inline WeightedUniverse load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw format_error("weights: cannot open " + path.string());
  return load_weights(in);
}

// n independent draws from P via inverse-CDF over a SplitMix64 stream.
// A pure function of (w, n, seed).
inline SampledSet sample_set(const WeightedUniverse& w, std::uint64_t n,
                             std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_set: n must be >= 1");
  SplitMix64 gen(seed);
  SampledSet s;
  s.universe_size = w.size();
  s.draws.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i)
    s.draws.push_back(w.inverse_cdf(gen.next_unit()));
  s.distinct = s.draws;
  std::sort(s.distinct.begin(), s.distinct.end());
  s.distinct.erase(std::unique(s.distinct.begin(), s.distinct.end()),
                   s.distinct.end());
  return s;
}

struct AssumptionCheck {
  double value = 0.0;  // n * sum_x p_x q_x
  bool holds = false;  // value <= F
};

// The workload inner product n*<p,q>, which must stay below the false
// positive budget for the rate guarantee to bind.
inline AssumptionCheck assumption_holds(const WeightedUniverse& w,
                                        std::uint64_t n, double F) {
  if (!(F > 0.0 && F < 1.0))
    throw std::invalid_argument("assumption_holds: F must be in (0,1)");
  NeumaierSum dot;
  for (std::uint64_t x = 0; x < w.size(); ++x)
    dot.add(w.p(static_cast<element_id>(x)) * w.q(static_cast<element_id>(x)));
  AssumptionCheck c;
  c.value = static_cast<double>(n) * dot.value();
  c.holds = c.value <= F;
  return c;
}

// Shannon entropy of n draws from P, in bits. Terms with p = 0 contribute 0.
inline double entropy_bits(const WeightedUniverse& w, std::uint64_t n) {
  NeumaierSum h;
  for (std::uint64_t x = 0; x < w.size(); ++x) {
    const double p = w.p(static_cast<element_id>(x));
    if (p > 0.0) h.add(p * std::log2(1.0 / p));
  }
  return static_cast<double>(n) * h.value();
}

}  // namespace daisy
