#pragma once

#include <memory>
#include <ostream>
#include <vector>

#include "daisy/analysis.hpp"
#include "daisy/config.hpp"
#include "daisy/distribution.hpp"
#include "daisy/planner.hpp"

namespace daisy {

// Subcommand implementations. Each writes CSV to `out`, diagnostics to `err`,
// and returns the process exit code: 0 ok, 2 config/usage error, 3 runtime
// audit failure. Every byte of output is a pure function of the config.

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAuditFailure = 3;

namespace detail {

inline FilterPlan make_plan_for(const std::shared_ptr<const WeightedUniverse>& w,
                                const ExperimentConfig& cfg, PlanKind kind) {
  switch (kind) {
    case PlanKind::daisy: return plan_daisy(w, cfg.n, cfg.F_user);
    case PlanKind::standard: return plan_standard(w, cfg.n, cfg.F_user);
    case PlanKind::ratio_only: return plan_ratio_only(w, cfg.n, cfg.F_user);
  }
  throw std::logic_error("make_plan_for: unreachable");
}

}  // namespace detail

inline int cmd_plan(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    const auto w = make_universe(cfg);
    for (PlanKind kind : cfg.kinds) {
      const FilterPlan plan = detail::make_plan_for(w, cfg, kind);
      const PlanReport rep = plan_report(plan);
      write_plan_report_csv(out, rep);
      out << "expected_distinct," << fmt12(rep.expected_distinct) << '\n';
      out << "bits_per_expected_distinct," << fmt12(rep.bits_per_expected_distinct) << '\n';
      out << "q_only_elements," << rep.q_only_count << '\n';
    }
    const AssumptionCheck ac = assumption_holds(*w, cfg.n, cfg.F_user / 6.0);
    out << "expected_size_lower_bound,"
        << fmt12(expected_size_lower_bound(*w, cfg.n, cfg.F_user)) << '\n';
    out << "entropy_bits," << fmt12(entropy_bits(*w, cfg.n)) << '\n';
    out << "assumption_value," << fmt12(ac.value) << '\n';
    out << "assumption_ok," << (ac.holds ? 1 : 0) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "plan: " << e.what() << '\n';
    return kExitUsage;
  }
}

inline int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    const auto w = make_universe(cfg);
    std::vector<BatchResult> results;
    results.reserve(cfg.kinds.size());
    for (PlanKind kind : cfg.kinds) {
      auto plan = std::make_shared<const FilterPlan>(detail::make_plan_for(w, cfg, kind));
      results.push_back(run_batch(plan, cfg.trials, cfg.seed0, cfg.threads));
    }
    out << kTrialCsvHeader << '\n';
    for (const BatchResult& res : results)
      for (const TrialReport& t : res.trials) write_trial_csv_row(out, t);
    out << kBatchCsvHeader << '\n';
    for (const BatchResult& res : results)
      write_batch_summary_row(out, res.summary);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "simulate: " << e.what() << '\n';
    return kExitUsage;
  }
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    const bool by_fpr = !cfg.sweep_fpr.empty();
    const bool by_zipf = !cfg.sweep_zipf.empty();
    if (by_fpr == by_zipf)
      throw std::invalid_argument("sweep: provide exactly one of sweep_fpr / sweep_zipf");
    if (by_zipf && cfg.universe != ExperimentConfig::UniverseKind::zipf)
      throw std::invalid_argument("sweep: sweep_zipf requires universe = zipf");

    out << "param,value," << kBatchCsvHeader << '\n';
    if (by_fpr) {
      const auto w = make_universe(cfg);
      for (double F : cfg.sweep_fpr) {
        ExperimentConfig c = cfg;
        c.F_user = F;
        validate(c);
        for (PlanKind kind : c.kinds) {
          auto plan = std::make_shared<const FilterPlan>(detail::make_plan_for(w, c, kind));
          const BatchResult res = run_batch(plan, c.trials, c.seed0, c.threads);
          out << "fpr," << fmt12(F) << ',';
          write_batch_summary_row(out, res.summary);
        }
      }
    } else {
      for (double s : cfg.sweep_zipf) {
        ExperimentConfig c = cfg;
        c.zipf_s = s;
        validate(c);
        const auto w = make_universe(c);
        for (PlanKind kind : c.kinds) {
          auto plan = std::make_shared<const FilterPlan>(detail::make_plan_for(w, c, kind));
          const BatchResult res = run_batch(plan, c.trials, c.seed0, c.threads);
          out << "zipf_s," << fmt12(s) << ',';
          write_batch_summary_row(out, res.summary);
        }
      }
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "sweep: " << e.what() << '\n';
    return kExitUsage;
  }
}

inline int cmd_audit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  bool violation = false;
  try {
    validate(cfg);
    const auto w = make_universe(cfg);
    auto plan = std::make_shared<const FilterPlan>(plan_daisy(w, cfg.n, cfg.F_user));
    out << "trial,seed,m_bits,lb_bits,expected_size_lower_bound,entropy_bits,"
           "sum_b,yes_count,kraft_u01,kraft_u2,kraft_u3,kraft_u4,kraft_ok\n";
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      const std::uint64_t seed = cfg.seed0 + t;
      SplitMix64 root(seed);
      const std::uint64_t sample_seed = root.next();
      const std::uint64_t hash_seed = root.next();
      const SampledSet s = sample_set(*w, cfg.n, sample_seed);
      const DaisyFilter f = build(plan, s, hash_seed);
      const BoundAudit a = audit_bounds(f, s, *w, cfg.F_user, cfg.n);
      if (!a.kraft_ok) violation = true;
      out << t << ',' << seed << ',' << a.filter_bits << ',' << fmt12(a.lb_bits)
          << ',' << fmt12(a.expected_size_lower_bound) << ','
          << fmt12(a.entropy_bits) << ',' << fmt12(a.encoding_total_bits) << ','
          << a.yes_count;
      for (double k : a.kraft) out << ',' << fmt12(k);
      out << ',' << (a.kraft_ok ? 1 : 0) << '\n';
    }
  } catch (const std::exception& e) {
    err << "audit: " << e.what() << '\n';
    return kExitUsage;
  }
  if (violation) {
    err << "audit: Kraft inequality violated on at least one instance\n";
    return kExitAuditFailure;
  }
  return kExitOk;
}

}  // namespace daisy
