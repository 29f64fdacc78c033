#pragma once

// Test-side oracles, written independently of the library code paths they
// check: the five partition predicates straight from their definitions, the
// per-case hash-count formula, and a brute-force weighted FPR that re-derives
// probe positions and reads raw words instead of going through the filter.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "daisy/distribution.hpp"
#include "daisy/filter.hpp"
#include "daisy/planner.hpp"

namespace testsupport {

inline std::array<bool, 5> class_predicates(double p, double q, std::uint64_t n,
                                            double F) {
  const double fn = F / static_cast<double>(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  return {
      q <= F * p,                                   // U0
      q > F * p && p > inv_n,                       // U1
      F * p < q && q <= std::min(p, fn),            // U2
      q > p && fn >= p,                             // U3
      q > fn && fn < p && p <= inv_n,               // U4
  };
}

inline double case_k(int cls, double p, double q, std::uint64_t n, double F) {
  switch (cls) {
    case 0:
    case 1: return 0.0;
    case 2: return std::log2((1.0 / F) * (q / p));
    case 3: return std::log2(1.0 / F);
    case 4: return std::log2(1.0 / (static_cast<double>(n) * p));
  }
  return -1.0;
}

// --- exact-arithmetic evaluation of the class predicates -------------------
//
// Every boundary comparison is the sign of a*b - c over doubles (divisions
// rewritten as products: q <= F/n is q*n <= F). That sign is computed
// exactly: fma gives the product as an error-free (hi, lo) pair, and a short
// expansion distillation yields the exact sign of hi + lo - c. Under exact
// arithmetic the five sets are a partition for every input; a grid point can
// only look two-hot when two boundary expressions that denote the same real
// number are evaluated with different double roundings.

struct TwoSum {
  double s, e;
};

inline TwoSum two_sum(double a, double b) {
  const double s = a + b;
  const double bv = s - a;
  const double av = s - bv;
  return {s, (a - av) + (b - bv)};
}

// Exact sign of a*b - c. Inputs must be far from the subnormal range, which
// the grids guarantee.
inline int sign_ab_minus_c(double a, double b, double c) {
  const double hi = a * b;
  const double lo = std::fma(a, b, -hi);
  double x0 = hi, x1 = lo, x2 = -c;
  for (int pass = 0; pass < 3; ++pass) {
    const TwoSum t1 = two_sum(x1, x2);
    const TwoSum t2 = two_sum(x0, t1.s);
    x0 = t2.s;
    x1 = t2.e;
    x2 = t1.e;
  }
  for (double x : {x0, x1, x2})
    if (x != 0.0) return x > 0.0 ? 1 : -1;
  return 0;
}

inline std::array<bool, 5> class_predicates_exact(double p, double q,
                                                  std::uint64_t n_, double F) {
  const double n = static_cast<double>(n_);
  const int q_vs_Fp = sign_ab_minus_c(F, p, q);   // F*p - q
  const int p_vs_invn = sign_ab_minus_c(p, n, 1.0);  // p*n - 1
  const int q_vs_fn = sign_ab_minus_c(q, n, F);   // q*n - F
  const int p_vs_fn = sign_ab_minus_c(p, n, F);   // p*n - F
  return {
      q_vs_Fp >= 0,                                          // q <= F*p
      q_vs_Fp < 0 && p_vs_invn > 0,                          // q > F*p, p > 1/n
      q_vs_Fp < 0 && q <= p && q_vs_fn <= 0,                 // q <= min(p, F/n)
      q > p && p_vs_fn <= 0,                                 // q > p, p <= F/n
      q_vs_fn > 0 && p_vs_fn > 0 && p_vs_invn <= 0,          // F/n < p <= 1/n
  };
}

// Full per-tuple partition check used by the grid tests:
//  - the five predicates, evaluated independently in exact arithmetic, hold
//    for exactly one class;
//  - classify() satisfies the double-evaluated predicate of the class it
//    returns;
//  - the library k matches the exact class's case formula. The k function is
//    continuous across every class boundary, so even where double rounding
//    puts classify() on the other side of a boundary the value cannot move
//    measurably.
struct PartitionCheck {
  bool ok = false;
  int cls = -1;
};

inline PartitionCheck check_partition_tuple(double p, double q, std::uint64_t n,
                                            double F) {
  PartitionCheck out;
  const auto exact = class_predicates_exact(p, q, n, F);
  int hot = 0;
  for (int c = 0; c < 5; ++c)
    if (exact[c]) { ++hot; out.cls = c; }
  if (hot != 1) return out;

  const auto fl = class_predicates(p, q, n, F);
  const int got = static_cast<int>(daisy::classify(p, q, n, F));
  if (!fl[got]) return out;

  const double want = case_k(out.cls, p, q, n, F);
  if (std::abs(daisy::k_real(p, q, n, F) - want) > 1e-9) return out;
  out.ok = true;
  return out;
}


// Local copy of the pinned probe algorithm (SplitMix64 pair, g2 odd, double
// hashing), kept separate from the library implementation on purpose.
inline std::uint64_t oracle_probe(std::uint64_t seed, std::uint64_t x,
                                  std::uint64_t i, std::uint64_t m) {
  std::uint64_t state = seed ^ (x * 0x9E3779B97F4A7C15ULL);
  auto step = [&state] {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t g1 = step();
  const std::uint64_t g2 = step() | 1ULL;
  return (g1 + i * g2) % m;
}

inline double brute_force_fpr(const daisy::DaisyFilter& f,
                              const daisy::SampledSet& s,
                              const daisy::WeightedUniverse& w) {
  const std::uint64_t u = w.size();
  std::vector<char> member(u, 0);
  for (auto x : s.distinct) member[x] = 1;
  const auto words = f.bits().words();
  const std::uint64_t m = f.bits().size_bits();
  double total = 0.0;
  for (std::uint64_t x = 0; x < u; ++x) {
    if (member[x]) continue;
    const std::uint64_t k = f.plan().k_int[x];
    bool yes = true;
    for (std::uint64_t i = 1; i <= k && yes; ++i) {
      const std::uint64_t pos = oracle_probe(f.seed(), x, i, m);
      yes = (words[pos / 64] >> (pos % 64)) & 1;
    }
    if (yes) total += w.q(static_cast<daisy::element_id>(x));
  }
  return total;
}

// Random universe with occasional zero weights on either side.
inline daisy::WeightedUniverse random_universe(std::mt19937_64& rng,
                                               std::uint64_t u) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(u), q(u);
  bool p_pos = false, q_pos = false;
  for (std::uint64_t i = 0; i < u; ++i) {
    p[i] = unit(rng) < 0.15 ? 0.0 : std::exp(6.0 * unit(rng));
    q[i] = unit(rng) < 0.15 ? 0.0 : std::exp(6.0 * unit(rng));
    p_pos |= p[i] > 0.0;
    q_pos |= q[i] > 0.0;
  }
  if (!p_pos) p[rng() % u] = 1.0;
  if (!q_pos) q[rng() % u] = 1.0;
  return daisy::WeightedUniverse(std::move(p), std::move(q));
}

inline std::shared_ptr<const daisy::WeightedUniverse> shared(
    daisy::WeightedUniverse&& w) {
  return std::make_shared<const daisy::WeightedUniverse>(std::move(w));
}

}  // namespace testsupport
