#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "daisy/common.hpp"
#include "daisy/distribution.hpp"

namespace daisy {

// The five (p, q) regimes that decide an element's hash count. Every
// (p, q, n, F) falls in exactly one class:
//
//   U0: q <= F*p                                  k = 0 (always answer YES)
//   U1: q >  F*p and p > 1/n                      k = 0
//   U2: F*p < q <= min(p, F/n)                    k = log2(q / (F*p))
//   U3: q >  p  and p <= F/n                      k = log2(1/F)
//   U4: q >  F/n and F/n < p <= 1/n               k = log2(1 / (n*p))
enum class PartitionClass : std::uint8_t { U0 = 0, U1, U2, U3, U4 };

inline const char* to_string(PartitionClass c) {
  static constexpr const char* names[] = {"U0", "U1", "U2", "U3", "U4"};
  return names[static_cast<std::size_t>(c)];
}

namespace detail {
inline void check_classify_args(double p, double q, std::uint64_t n, double F) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("classify: p and q must be in [0,1]");
  if (n == 0) throw std::invalid_argument("classify: n must be >= 1");
  if (!(F > 0.0 && F < 1.0))
    throw std::invalid_argument("classify: F must be in (0,1)");
}
}  // namespace detail

inline PartitionClass classify(double p, double q, std::uint64_t n, double F) {
  detail::check_classify_args(p, q, n, F);
  const double nd = static_cast<double>(n);
  const double f_over_n = F / nd;
  if (q <= F * p) return PartitionClass::U0;
  if (p > 1.0 / nd) return PartitionClass::U1;
  if (q <= std::min(p, f_over_n)) return PartitionClass::U2;
  if (q > p && p <= f_over_n) return PartitionClass::U3;
  return PartitionClass::U4;
}

// Real-valued hash count for one element. U2 guarantees p >= q > 0 and U4
// guarantees p > F/n, so no division by zero is reachable.
inline double k_real(double p, double q, std::uint64_t n, double F) {
  switch (classify(p, q, n, F)) {
    case PartitionClass::U0:
    case PartitionClass::U1:
      return 0.0;
    case PartitionClass::U2:
      return std::log2(q / (F * p));
    case PartitionClass::U3:
      return std::log2(1.0 / F);
    case PartitionClass::U4:
      return std::log2(1.0 / (static_cast<double>(n) * p));
  }
  return 0.0;  // unreachable
}

// Round half up, then clamp into [0, ceil(log2(1/F))]. The cap keeps the
// worst-case probe count bounded no matter how rounding lands.
inline std::uint16_t k_int(double k, double F) {
  const double cap_real = std::log2(1.0 / F);
  if (!(k >= 0.0) || k > cap_real + 1e-9)
    throw std::invalid_argument("k_int: k outside [0, log2(1/F)]");
  const auto cap = static_cast<std::uint16_t>(std::ceil(cap_real));
  const double r = std::floor(k + 0.5);
  return static_cast<std::uint16_t>(std::min(r, static_cast<double>(cap)));
}

// Space benchmark in bits: n * sum_x p_x * k_x at budget F. Only U2/U3/U4
// contribute (k is zero elsewhere).
inline double lb_bits(const WeightedUniverse& w, std::uint64_t n, double F) {
  NeumaierSum s;
  for (std::uint64_t x = 0; x < w.size(); ++x) {
    const auto id = static_cast<element_id>(x);
    s.add(w.p(id) * k_real(w.p(id), w.q(id), n, F));
  }
  return static_cast<double>(n) * s.value();
}

enum class PlanKind { daisy, standard, ratio_only };

inline const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::daisy: return "daisy";
    case PlanKind::standard: return "standard";
    case PlanKind::ratio_only: return "ratio_only";
  }
  return "?";
}

// Everything a filter instance needs, fixed before any data is seen:
// per-element hash counts, the partition labels, and the array length.
// Immutable and shareable across trials.
struct FilterPlan {
  std::shared_ptr<const WeightedUniverse> universe;
  PlanKind kind = PlanKind::daisy;
  std::uint64_t n = 0;
  double F_user = 0.0;
  double F_internal = 0.0;
  std::vector<double> k_real;
  std::vector<std::uint16_t> k_int;
  std::vector<PartitionClass> part;
  double lb_bits = 0.0;    // n * sum p_x * k_real[x]
  double x_expect = 0.0;   // n * sum p_x * k_int[x] = E[hash writes]
  std::uint64_t m_bits = 0;
  std::uint16_t k_cap = 0;  // ceil(log2(1/F_internal))
  bool degenerate = false;  // no element keeps any hash budget
  double assumption_value = 0.0;  // n * sum p_x q_x
  double expected_distinct = 0.0;
};

namespace detail {

inline void check_plan_args(const std::shared_ptr<const WeightedUniverse>& w,
                            std::uint64_t n, double F_user) {
  if (!w) throw std::invalid_argument("plan: null universe");
  if (n == 0) throw std::invalid_argument("plan: n must be >= 1");
  if (!(F_user > 0.0 && F_user < 1.0))
    throw std::invalid_argument("plan: F must be in (0,1)");
}

// Hash count from the ratio p/q alone. Ignores the high-p/high-q regimes,
// which is exactly what makes it an instructive baseline.
inline double ratio_only_k(double p, double q, double F) {
  if (q <= 0.0) return 0.0;
  if (p <= 0.0) return std::log2(1.0 / F);
  const double ratio = p / q;
  if (ratio >= 1.0 / F) return 0.0;
  if (ratio > 1.0) return std::log2(q / (F * p));
  return std::log2(1.0 / F);  // ratio <= 1 (boundary assigned the cap)
}

template <typename KFn>
FilterPlan make_plan(std::shared_ptr<const WeightedUniverse> w, std::uint64_t n,
                     double F_user, double F_internal, PlanKind kind, KFn&& kfn) {
  FilterPlan plan;
  plan.universe = std::move(w);
  plan.kind = kind;
  plan.n = n;
  plan.F_user = F_user;
  plan.F_internal = F_internal;
  plan.k_cap = static_cast<std::uint16_t>(std::ceil(std::log2(1.0 / F_internal)));
  const std::uint64_t u = plan.universe->size();
  plan.k_real.resize(u);
  plan.k_int.resize(u);
  plan.part.resize(u);
  NeumaierSum lb, xe, dot, distinct;
  const double nd = static_cast<double>(n);
  for (std::uint64_t x = 0; x < u; ++x) {
    const auto id = static_cast<element_id>(x);
    const double p = plan.universe->p(id);
    const double q = plan.universe->q(id);
    plan.part[x] = classify(p, q, n, F_internal);
    const double kr = kfn(p, q);
    plan.k_real[x] = kr;
    plan.k_int[x] = k_int(kr, F_internal);
    lb.add(p * kr);
    xe.add(p * static_cast<double>(plan.k_int[x]));
    dot.add(p * q);
    distinct.add(1.0 - std::pow(1.0 - p, nd));
  }
  plan.lb_bits = nd * lb.value();
  plan.x_expect = nd * xe.value();
  plan.assumption_value = nd * dot.value();
  plan.expected_distinct = distinct.value();
  plan.m_bits = std::max<std::uint64_t>(
      64, static_cast<std::uint64_t>(std::ceil(kLog2E * plan.lb_bits)));
  plan.degenerate = !(plan.lb_bits > 0.0);
  return plan;
}

}  // namespace detail

// Distribution-aware plan. Both the per-element hash counts and the array
// length are instantiated at F_user/6, which is what makes the user-facing
// false positive rate come out at F_user.
inline FilterPlan plan_daisy(std::shared_ptr<const WeightedUniverse> w,
                             std::uint64_t n, double F_user) {
  detail::check_plan_args(w, n, F_user);
  const double F_int = F_user / 6.0;
  return detail::make_plan(std::move(w), n, F_user, F_int, PlanKind::daisy,
                           [n, F_int](double p, double q) {
                             return k_real(p, q, n, F_int);
                           });
}

// Classic Bloom filter: every element gets ceil(log2(1/F)) hashes and the
// array is sized for n keys at budget F.
inline FilterPlan plan_standard(std::shared_ptr<const WeightedUniverse> w,
                                std::uint64_t n, double F) {
  detail::check_plan_args(w, n, F);
  const double k = std::log2(1.0 / F);
  FilterPlan plan = detail::make_plan(
      std::move(w), n, F, F, PlanKind::standard,
      [k](double, double) { return k; });
  for (auto& ki : plan.k_int) ki = plan.k_cap;
  {
    NeumaierSum xe;
    for (std::uint64_t x = 0; x < plan.universe->size(); ++x)
      xe.add(plan.universe->p(static_cast<element_id>(x)) *
             static_cast<double>(plan.k_int[x]));
    plan.x_expect = static_cast<double>(n) * xe.value();
  }
  plan.m_bits = std::max<std::uint64_t>(
      64, static_cast<std::uint64_t>(std::ceil(kLog2E * static_cast<double>(n) * k)));
  return plan;
}

// Ratio-only baseline, given the same F/6 internal budget as the main plan
// so space and rate comparisons are like for like.
inline FilterPlan plan_ratio_only(std::shared_ptr<const WeightedUniverse> w,
                                  std::uint64_t n, double F_user) {
  detail::check_plan_args(w, n, F_user);
  const double F_int = F_user / 6.0;
  return detail::make_plan(std::move(w), n, F_user, F_int, PlanKind::ratio_only,
                           [F_int](double p, double q) {
                             return detail::ratio_only_k(p, q, F_int);
                           });
}

struct ClassSummary {
  std::uint64_t count = 0;
  double sum_p = 0.0;
  double sum_q = 0.0;
  std::uint16_t k_min = 0;
  std::uint16_t k_max = 0;
};

struct PlanReport {
  std::array<ClassSummary, 5> by_class{};
  std::map<std::uint16_t, std::uint64_t> k_histogram;
  double lb_bits = 0.0;
  std::uint64_t m_bits = 0;
  double F_user = 0.0;
  double F_internal = 0.0;
  PlanKind kind = PlanKind::daisy;
  bool degenerate = false;
  double expected_distinct = 0.0;
  double bits_per_expected_distinct = 0.0;
  std::uint64_t q_only_count = 0;  // q > 0 with p = 0: pure false-positive risk
};

inline PlanReport plan_report(const FilterPlan& plan) {
  PlanReport r;
  std::array<NeumaierSum, 5> sp, sq;
  std::array<bool, 5> touched{};
  const WeightedUniverse& w = *plan.universe;
  for (std::uint64_t x = 0; x < w.size(); ++x) {
    const auto id = static_cast<element_id>(x);
    const auto c = static_cast<std::size_t>(plan.part[x]);
    auto& cs = r.by_class[c];
    ++cs.count;
    sp[c].add(w.p(id));
    sq[c].add(w.q(id));
    const std::uint16_t k = plan.k_int[x];
    if (!touched[c]) {
      cs.k_min = cs.k_max = k;
      touched[c] = true;
    } else {
      cs.k_min = std::min(cs.k_min, k);
      cs.k_max = std::max(cs.k_max, k);
    }
    ++r.k_histogram[k];
    if (w.q(id) > 0.0 && w.p(id) == 0.0) ++r.q_only_count;
  }
  for (std::size_t c = 0; c < 5; ++c) {
    r.by_class[c].sum_p = sp[c].value();
    r.by_class[c].sum_q = sq[c].value();
  }
  r.lb_bits = plan.lb_bits;
  r.m_bits = plan.m_bits;
  r.F_user = plan.F_user;
  r.F_internal = plan.F_internal;
  r.kind = plan.kind;
  r.degenerate = plan.degenerate;
  r.expected_distinct = plan.expected_distinct;
  r.bits_per_expected_distinct =
      plan.expected_distinct > 0.0
          ? static_cast<double>(plan.m_bits) / plan.expected_distinct
          : 0.0;
  return r;
}

inline void write_plan_report_csv(std::ostream& os, const PlanReport& r) {
  os << "class,count,sum_p,sum_q,k_min,k_max\n";
  for (std::size_t c = 0; c < 5; ++c) {
    const auto& cs = r.by_class[c];
    os << to_string(static_cast<PartitionClass>(c)) << ',' << cs.count << ','
       << fmt12(cs.sum_p) << ',' << fmt12(cs.sum_q) << ',' << cs.k_min << ','
       << cs.k_max << '\n';
  }
  os << "lb_bits,m_bits,F_user,F_internal,kind,degenerate\n";
  os << fmt12(r.lb_bits) << ',' << r.m_bits << ',' << fmt12(r.F_user) << ','
     << fmt12(r.F_internal) << ',' << to_string(r.kind) << ','
     << (r.degenerate ? 1 : 0) << '\n';
}

}  // namespace daisy
