#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <thread>
#include <vector>

#include "daisy/common.hpp"
#include "daisy/distribution.hpp"
#include "daisy/filter.hpp"
#include "daisy/planner.hpp"
#include "daisy/prng.hpp"

namespace daisy {

// ---------------------------------------------------------------------------
// Exact false positive rate by full enumeration.

struct FprBreakdown {
  double total = 0.0;                  // sum of q over YES non-members
  std::array<double, 5> by_class{};    // split by the plan's partition label
  std::uint64_t yes_non_members = 0;
};

// Walks every element outside the distinct input set and adds its q where the
// filter answers YES. For a fixed built filter this is the exact conditional
// rate of the instance, with zero sampling noise.
inline FprBreakdown exact_weighted_fpr(const DaisyFilter& f, const SampledSet& s,
                                       const WeightedUniverse& w) {
  const std::uint64_t u = w.size();
  if (u > kMaxEnumerableUniverse)
    throw std::invalid_argument("exact_weighted_fpr: universe too large to enumerate");
  if (f.plan().universe->size() != u || s.universe_size != u)
    throw std::invalid_argument("exact_weighted_fpr: universe mismatch");
  std::vector<char> member(u, 0);
  for (element_id x : s.distinct) member[x] = 1;
  std::array<NeumaierSum, 5> acc;
  FprBreakdown out;
  for (std::uint64_t x = 0; x < u; ++x) {
    if (member[x]) continue;
    const auto id = static_cast<element_id>(x);
    if (f.query(id)) {
      acc[static_cast<std::size_t>(f.plan().part[x])].add(w.q(id));
      ++out.yes_non_members;
    }
  }
  NeumaierSum total;
  for (std::size_t c = 0; c < 5; ++c) {
    out.by_class[c] = acc[c].value();
    total.add(out.by_class[c]);
  }
  out.total = total.value();
  return out;
}

// ---------------------------------------------------------------------------
// Concentration and load checks.

struct ConcentrationCheck {
  double tau = 0.0;
  bool ok = false;
};

// X may exceed its expectation by at most a 1 + 1/(2*log2(1/F)) factor for
// the load argument to go through.
inline ConcentrationCheck concentration_check(std::uint64_t X, double x_expect,
                                              double F_internal) {
  if (!(F_internal > 0.0 && F_internal < 1.0))
    throw std::invalid_argument("concentration_check: F must be in (0,1)");
  ConcentrationCheck c;
  c.tau = 1.0 / (2.0 * std::log2(1.0 / F_internal));
  c.ok = x_expect <= 0.0 ||
         static_cast<double>(X) <= (1.0 + c.tau) * x_expect;
  return c;
}

enum class RhoCheck { fail = 0, pass = 1, not_applicable = -1 };

// Minimum zero fraction consistent with the per-query bound (1-rho)^k <= 2*2^-k.
// Defined for F <= 1/2 only.
inline double rho_threshold(double F_internal) {
  return 1.0 - std::exp2(1.0 / std::log2(1.0 / F_internal)) * 0.5;
}

inline RhoCheck rho_check(double rho, double F_internal) {
  if (!(F_internal > 0.0)) throw std::invalid_argument("rho_check: F must be > 0");
  if (F_internal > 0.5) return RhoCheck::not_applicable;
  return rho >= rho_threshold(F_internal) ? RhoCheck::pass : RhoCheck::fail;
}

// Lower bound on the expected size of any filter with no false negatives and
// Q-weighted false positive rate at most F over this workload. Can be
// negative at small n; reported as-is.
inline double expected_size_lower_bound(const WeightedUniverse& w,
                                        std::uint64_t n, double F) {
  return lb_bits(w, n, F) - 1.0 - 6.0 * static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Encoding-length audit.
//
// A built filter instance answers YES on a set of elements; the input draws
// can be encoded against that YES set with per-draw code lengths that depend
// on the draw's partition class. The audit computes those lengths and checks
// each of the four codebooks against the Kraft inequality (sum 2^-len <= 1),
// i.e. that prefix codes with these lengths actually exist.

struct EncodingAudit {
  std::vector<std::uint32_t> b;        // per-draw code length, in draw order
  double total_bits = 0.0;             // sum of b
  std::array<double, 4> kraft{};       // codebooks: U0+U1, U2, U3, U4
  std::array<std::uint64_t, 4> codebook_sizes{};
  std::uint64_t yes_count = 0;         // |YES set|
};

namespace detail {
inline std::uint32_t code_len(double v) {
  // v >= 4 for every reachable case.
  return static_cast<std::uint32_t>(std::ceil(std::log2(v)));
}
}  // namespace detail

inline EncodingAudit encoding_lengths(const DaisyFilter& f, const SampledSet& s,
                                      const WeightedUniverse& w, double F) {
  const std::uint64_t u = w.size();
  if (u > kMaxEnumerableUniverse)
    throw std::invalid_argument("encoding_lengths: universe too large to enumerate");
  if (f.plan().universe->size() != u || s.universe_size != u)
    throw std::invalid_argument("encoding_lengths: universe mismatch");
  const std::uint64_t n = s.draws.size();

  // Pass 1: realized YES set, class totals restricted to it.
  std::vector<char> yes(u, 0);
  std::vector<PartitionClass> cls(u);
  NeumaierSum q_yes_u2, p_yes_u3;
  std::uint64_t yes_u4 = 0;
  EncodingAudit audit;
  for (std::uint64_t x = 0; x < u; ++x) {
    const auto id = static_cast<element_id>(x);
    cls[x] = classify(w.p(id), w.q(id), n, F);
    if (!f.query(id)) continue;
    yes[x] = 1;
    ++audit.yes_count;
    if (cls[x] == PartitionClass::U2) q_yes_u2.add(w.q(id));
    if (cls[x] == PartitionClass::U3) p_yes_u3.add(w.p(id));
    if (cls[x] == PartitionClass::U4) ++yes_u4;
  }
  const double sum_q2 = q_yes_u2.value();
  const double sum_p3 = p_yes_u3.value();

  // Per-draw code lengths against the realized YES set.
  audit.b.reserve(n);
  NeumaierSum total;
  for (element_id x : s.draws) {
    const double p = w.p(x);
    const double q = w.q(x);
    std::uint32_t len = 0;
    switch (cls[x]) {
      case PartitionClass::U0:
      case PartitionClass::U1:
        if (!(p > 0.0)) throw format_error("encoding audit: drawn element with p = 0");
        len = detail::code_len(4.0 / p);
        break;
      case PartitionClass::U2:
        if (!(q > 0.0 && sum_q2 > 0.0))
          throw format_error("encoding audit: empty U2 codebook for a drawn element");
        len = detail::code_len(4.0 * sum_q2 / q);
        break;
      case PartitionClass::U3:
        if (!(p > 0.0 && sum_p3 > 0.0))
          throw format_error("encoding audit: empty U3 codebook for a drawn element");
        len = detail::code_len(4.0 * sum_p3 / p);
        break;
      case PartitionClass::U4:
        if (yes_u4 == 0)
          throw format_error("encoding audit: empty U4 codebook for a drawn element");
        len = detail::code_len(4.0 * static_cast<double>(yes_u4));
        break;
    }
    audit.b.push_back(len);
    total.add(static_cast<double>(len));
  }
  audit.total_bits = total.value();

  // Pass 2: Kraft sums over each codebook's full codeword set.
  std::array<NeumaierSum, 4> kraft;
  for (std::uint64_t x = 0; x < u; ++x) {
    const auto id = static_cast<element_id>(x);
    const double p = w.p(id);
    const double q = w.q(id);
    switch (cls[x]) {
      case PartitionClass::U0:
      case PartitionClass::U1:
        if (p > 0.0) {
          kraft[0].add(std::exp2(-static_cast<double>(detail::code_len(4.0 / p))));
          ++audit.codebook_sizes[0];
        }
        break;
      case PartitionClass::U2:
        if (yes[x]) {
          kraft[1].add(std::exp2(-static_cast<double>(detail::code_len(4.0 * sum_q2 / q))));
          ++audit.codebook_sizes[1];
        }
        break;
      case PartitionClass::U3:
        if (yes[x] && p > 0.0) {
          kraft[2].add(std::exp2(-static_cast<double>(detail::code_len(4.0 * sum_p3 / p))));
          ++audit.codebook_sizes[2];
        }
        break;
      case PartitionClass::U4:
        break;  // fixed-length codebook handled below
    }
  }
  if (yes_u4 > 0) {
    kraft[3].add(static_cast<double>(yes_u4) *
                 std::exp2(-static_cast<double>(detail::code_len(4.0 * static_cast<double>(yes_u4)))));
    audit.codebook_sizes[3] = yes_u4;
  }
  for (std::size_t i = 0; i < 4; ++i) audit.kraft[i] = kraft[i].value();
  return audit;
}

struct BoundAudit {
  double lb_bits = 0.0;                // at the audited F
  double expected_size_lower_bound = 0.0;  // lb_bits - 1 - 6n
  double entropy_bits = 0.0;
  double encoding_total_bits = 0.0;    // sum of per-draw lengths
  std::array<double, 4> kraft{};
  std::uint64_t yes_count = 0;
  std::uint64_t filter_bits = 0;
  bool kraft_ok = false;
};

inline BoundAudit audit_bounds(const DaisyFilter& f, const SampledSet& s,
                               const WeightedUniverse& w, double F,
                               std::uint64_t n) {
  BoundAudit a;
  a.lb_bits = lb_bits(w, n, F);
  a.expected_size_lower_bound = a.lb_bits - 1.0 - 6.0 * static_cast<double>(n);
  a.entropy_bits = entropy_bits(w, n);
  const EncodingAudit enc = encoding_lengths(f, s, w, F);
  a.encoding_total_bits = enc.total_bits;
  a.kraft = enc.kraft;
  a.yes_count = enc.yes_count;
  a.filter_bits = f.bits().size_bits();
  a.kraft_ok = true;
  for (double k : a.kraft)
    if (!(k <= 1.0 + 1e-9)) a.kraft_ok = false;
  return a;
}

// ---------------------------------------------------------------------------
// Trials.

struct TrialReport {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  PlanKind kind = PlanKind::daisy;
  double F_user = 0.0;
  double F_internal = 0.0;
  std::uint64_t n = 0;
  std::uint64_t u = 0;
  std::uint64_t m_bits = 0;
  std::uint64_t X = 0;            // hash writes with multiplicity
  double x_expect = 0.0;          // n * sum p_x k_int[x]
  double tau = 0.0;
  bool concentration_ok = false;
  double rho = 0.0;
  RhoCheck rho_ok = RhoCheck::not_applicable;
  double fpr = 0.0;
  std::array<double, 5> fpr_by_class{};
  double assumption_value = 0.0;  // n * sum p_x q_x
  bool assumption_ok = false;     // against F_user / 6
  std::uint64_t distinct = 0;
  std::uint32_t max_op_touch = 0;
  std::uint16_t touch_cap = 0;
};

// One build + exact measurement. The trial seed is split into independent
// sampling and hashing sub-seeds, so the whole report is a pure function of
// (plan, seed).
inline TrialReport run_trial(const std::shared_ptr<const FilterPlan>& plan,
                             std::uint64_t trial_idx, std::uint64_t seed,
                             bool measure_fpr = true) {
  SplitMix64 root(seed);
  const std::uint64_t sample_seed = root.next();
  const std::uint64_t hash_seed = root.next();
  const WeightedUniverse& w = *plan->universe;
  const SampledSet s = sample_set(w, plan->n, sample_seed);
  const DaisyFilter f = build(plan, s, hash_seed);

  TrialReport r;
  r.trial = trial_idx;
  r.seed = seed;
  r.kind = plan->kind;
  r.F_user = plan->F_user;
  r.F_internal = plan->F_internal;
  r.n = plan->n;
  r.u = w.size();
  r.m_bits = plan->m_bits;
  r.X = f.hash_writes();
  r.x_expect = plan->x_expect;
  const ConcentrationCheck cc = concentration_check(r.X, r.x_expect, plan->F_internal);
  r.tau = cc.tau;
  r.concentration_ok = cc.ok;
  r.rho = f.zero_fraction();
  r.rho_ok = rho_check(r.rho, plan->F_internal);
  if (measure_fpr) {
    const FprBreakdown fpr = exact_weighted_fpr(f, s, w);
    r.fpr = fpr.total;
    r.fpr_by_class = fpr.by_class;
  }
  r.assumption_value = plan->assumption_value;
  r.assumption_ok = plan->assumption_value <= plan->F_user / 6.0;
  r.distinct = s.distinct.size();
  r.max_op_touch = f.max_op_touch();
  r.touch_cap = plan->k_cap;
  return r;
}

inline TrialReport run_trial(std::shared_ptr<const WeightedUniverse> w,
                             std::uint64_t n, double F_user, PlanKind kind,
                             std::uint64_t seed) {
  std::shared_ptr<const FilterPlan> plan;
  switch (kind) {
    case PlanKind::daisy:
      plan = std::make_shared<const FilterPlan>(plan_daisy(std::move(w), n, F_user));
      break;
    case PlanKind::standard:
      plan = std::make_shared<const FilterPlan>(plan_standard(std::move(w), n, F_user));
      break;
    case PlanKind::ratio_only:
      plan = std::make_shared<const FilterPlan>(plan_ratio_only(std::move(w), n, F_user));
      break;
  }
  return run_trial(plan, 0, seed);
}

struct BatchSummary {
  PlanKind kind = PlanKind::daisy;
  std::uint64_t trials = 0;
  double mean_fpr = 0.0;
  double median_fpr = 0.0;
  double p95_fpr = 0.0;
  double max_fpr = 0.0;
  double frac_fpr_le_F = 0.0;
  double frac_conc_ok = 0.0;
  double frac_rho_ok = 0.0;       // not-applicable counts as non-failing
  double frac_fpr_le_F_given_conc = 0.0;
  double frac_rho_ok_given_conc = 0.0;
  double mean_rho = 0.0;
  std::uint64_t m_bits = 0;
  double lb_bits = 0.0;
  bool degenerate = false;
  double bits_per_key = 0.0;      // m_bits / n
  double bits_per_expected_distinct = 0.0;
  double x_expect = 0.0;
  double tau = 0.0;
  double assumption_value = 0.0;
  bool assumption_ok = false;
};

struct BatchResult {
  std::vector<TrialReport> trials;
  BatchSummary summary;
};

namespace detail {
inline double quantile_sorted(const std::vector<double>& sorted, double frac) {
  if (sorted.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(
      std::floor(frac * static_cast<double>(sorted.size() - 1)));
  return sorted[idx];
}
}  // namespace detail

// Independent seeded trials seed0, seed0+1, ... aggregated in trial order.
// Trials may be spread over worker threads; each trial owns its filter and
// writes only its own slot, so the result is identical for any thread count.
inline BatchResult run_batch(std::shared_ptr<const FilterPlan> plan,
                             std::uint64_t trials, std::uint64_t seed0,
                             unsigned threads = 1, bool measure_fpr = true) {
  if (trials == 0) throw std::invalid_argument("run_batch: trials must be >= 1");
  BatchResult res;
  res.trials.resize(trials);
  const unsigned nw = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  if (nw == 1) {
    for (std::uint64_t t = 0; t < trials; ++t)
      res.trials[t] = run_trial(plan, t, seed0 + t, measure_fpr);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(nw);
    for (unsigned wi = 0; wi < nw; ++wi) {
      workers.emplace_back([&, wi] {
        for (std::uint64_t t = wi; t < trials; t += nw)
          res.trials[t] = run_trial(plan, t, seed0 + t, measure_fpr);
      });
    }
    for (auto& th : workers) th.join();
  }

  BatchSummary& s = res.summary;
  s.kind = plan->kind;
  s.trials = trials;
  s.m_bits = plan->m_bits;
  s.lb_bits = plan->lb_bits;
  s.degenerate = plan->degenerate;
  s.bits_per_key = static_cast<double>(plan->m_bits) / static_cast<double>(plan->n);
  s.bits_per_expected_distinct =
      plan->expected_distinct > 0.0
          ? static_cast<double>(plan->m_bits) / plan->expected_distinct
          : 0.0;
  s.x_expect = plan->x_expect;
  s.assumption_value = plan->assumption_value;
  s.assumption_ok = plan->assumption_value <= plan->F_user / 6.0;

  std::vector<double> fprs;
  fprs.reserve(trials);
  NeumaierSum fpr_sum, rho_sum;
  std::uint64_t le_F = 0, conc = 0, rho_fail = 0;
  std::uint64_t le_F_conc = 0, rho_ok_conc = 0;
  for (const TrialReport& t : res.trials) {
    fprs.push_back(t.fpr);
    fpr_sum.add(t.fpr);
    rho_sum.add(t.rho);
    const bool le = t.fpr <= plan->F_user;
    if (le) ++le_F;
    if (t.concentration_ok) {
      ++conc;
      if (le) ++le_F_conc;
      if (t.rho_ok != RhoCheck::fail) ++rho_ok_conc;
    }
    if (t.rho_ok == RhoCheck::fail) ++rho_fail;
    s.tau = t.tau;
  }
  std::sort(fprs.begin(), fprs.end());
  const double T = static_cast<double>(trials);
  s.mean_fpr = fpr_sum.value() / T;
  s.median_fpr = detail::quantile_sorted(fprs, 0.5);
  s.p95_fpr = detail::quantile_sorted(fprs, 0.95);
  s.max_fpr = fprs.back();
  s.mean_rho = rho_sum.value() / T;
  s.frac_fpr_le_F = static_cast<double>(le_F) / T;
  s.frac_conc_ok = static_cast<double>(conc) / T;
  s.frac_rho_ok = 1.0 - static_cast<double>(rho_fail) / T;
  s.frac_fpr_le_F_given_conc =
      conc > 0 ? static_cast<double>(le_F_conc) / static_cast<double>(conc)
               : std::nan("");
  s.frac_rho_ok_given_conc =
      conc > 0 ? static_cast<double>(rho_ok_conc) / static_cast<double>(conc)
               : std::nan("");
  return res;
}

inline BatchResult run_batch(std::shared_ptr<const WeightedUniverse> w,
                             std::uint64_t n, double F_user, PlanKind kind,
                             std::uint64_t trials, std::uint64_t seed0,
                             unsigned threads = 1) {
  std::shared_ptr<const FilterPlan> plan;
  switch (kind) {
    case PlanKind::daisy:
      plan = std::make_shared<const FilterPlan>(plan_daisy(std::move(w), n, F_user));
      break;
    case PlanKind::standard:
      plan = std::make_shared<const FilterPlan>(plan_standard(std::move(w), n, F_user));
      break;
    case PlanKind::ratio_only:
      plan = std::make_shared<const FilterPlan>(plan_ratio_only(std::move(w), n, F_user));
      break;
  }
  return run_batch(std::move(plan), trials, seed0, threads);
}

// ---------------------------------------------------------------------------
// CSV emission.

inline constexpr const char* kTrialCsvHeader =
    "trial,seed,kind,F_user,F_internal,n,u,m_bits,X,x_expect,tau,"
    "concentration_ok,rho,rho_ok,fpr,fpr_U0,fpr_U1,fpr_U2,fpr_U3,fpr_U4,"
    "assumption_value,assumption_ok";

inline void write_trial_csv_row(std::ostream& os, const TrialReport& r) {
  os << r.trial << ',' << r.seed << ',' << to_string(r.kind) << ','
     << fmt12(r.F_user) << ',' << fmt12(r.F_internal) << ',' << r.n << ','
     << r.u << ',' << r.m_bits << ',' << r.X << ',' << fmt12(r.x_expect) << ','
     << fmt12(r.tau) << ',' << (r.concentration_ok ? 1 : 0) << ','
     << fmt12(r.rho) << ',';
  switch (r.rho_ok) {
    case RhoCheck::pass: os << 1; break;
    case RhoCheck::fail: os << 0; break;
    case RhoCheck::not_applicable: os << "na"; break;
  }
  os << ',' << fmt12(r.fpr);
  for (double v : r.fpr_by_class) os << ',' << fmt12(v);
  os << ',' << fmt12(r.assumption_value) << ',' << (r.assumption_ok ? 1 : 0)
     << '\n';
}

inline constexpr const char* kBatchCsvHeader =
    "kind,trials,mean_fpr,median_fpr,p95_fpr,max_fpr,frac_fpr_le_F,"
    "frac_conc_ok,frac_rho_ok,frac_fpr_le_F_given_conc,frac_rho_ok_given_conc,"
    "mean_rho,m_bits,lb_bits,degenerate,bits_per_key,"
    "bits_per_expected_distinct,x_expect,tau,assumption_value,assumption_ok";

inline void write_batch_summary_row(std::ostream& os, const BatchSummary& s) {
  os << to_string(s.kind) << ',' << s.trials << ',' << fmt12(s.mean_fpr) << ','
     << fmt12(s.median_fpr) << ',' << fmt12(s.p95_fpr) << ',' << fmt12(s.max_fpr)
     << ',' << fmt12(s.frac_fpr_le_F) << ',' << fmt12(s.frac_conc_ok) << ','
     << fmt12(s.frac_rho_ok) << ',' << fmt12(s.frac_fpr_le_F_given_conc) << ','
     << fmt12(s.frac_rho_ok_given_conc) << ',' << fmt12(s.mean_rho) << ','
     << s.m_bits << ',' << fmt12(s.lb_bits) << ',' << (s.degenerate ? 1 : 0)
     << ',' << fmt12(s.bits_per_key) << ',' << fmt12(s.bits_per_expected_distinct)
     << ',' << fmt12(s.x_expect) << ',' << fmt12(s.tau) << ','
     << fmt12(s.assumption_value) << ',' << (s.assumption_ok ? 1 : 0) << '\n';
}

}  // namespace daisy
