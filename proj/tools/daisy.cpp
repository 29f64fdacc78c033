// Command-line front end for the filter experiment harness.
//
//   daisy plan     <config> [flags]   per-class plan summary and bound values
//   daisy simulate <config> [flags]   seeded trials, exact FPR per trial
//   daisy sweep    <config> [flags]   batch summaries over an fpr/skew grid
//   daisy audit    <config> [flags]   encoding lengths and Kraft checks
//
// All output is CSV and a pure function of the effective configuration.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "daisy/commands.hpp"
#include "daisy/config.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string universe, zipf_side, weights, kinds, out;
  std::string sweep_fpr, sweep_zipf;
  std::uint64_t n = 0, u = 0, trials = 0;
  double fpr = -1.0, zipf_s = -1.0;
  std::int64_t seed = -1;
  unsigned threads = 0;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("config", ov.config_path, "config file (key = value lines)");
  cmd->add_option("--n", ov.n, "number of input draws");
  cmd->add_option("--fpr", ov.fpr, "false positive budget in (0,1)");
  cmd->add_option("--trials", ov.trials, "number of seeded trials");
  cmd->add_option("--seed", ov.seed, "base seed (trial t uses seed+t)");
  cmd->add_option("--out", ov.out, "output CSV path (default stdout)");
  cmd->add_option("--u", ov.u, "universe size");
  cmd->add_option("--universe", ov.universe, "uniform | zipf | file");
  cmd->add_option("--zipf-s", ov.zipf_s, "zipf exponent");
  cmd->add_option("--zipf-side", ov.zipf_side, "which side is zipf: p | q");
  cmd->add_option("--weights", ov.weights, "weights file (id,p,q)");
  cmd->add_option("--kinds", ov.kinds, "comma list: daisy,standard,ratio_only");
  cmd->add_option("--threads", ov.threads, "worker threads for trials");
  cmd->add_option("--sweep-fpr", ov.sweep_fpr, "comma list of F values to sweep");
  cmd->add_option("--sweep-zipf", ov.sweep_zipf, "comma list of zipf exponents to sweep");
}

daisy::ExperimentConfig effective_config(const Overrides& ov) {
  daisy::ExperimentConfig cfg;
  if (!ov.config_path.empty()) cfg = daisy::parse_config(ov.config_path);
  if (!ov.universe.empty()) {
    if (ov.universe == "uniform") cfg.universe = daisy::ExperimentConfig::UniverseKind::uniform;
    else if (ov.universe == "zipf") cfg.universe = daisy::ExperimentConfig::UniverseKind::zipf;
    else if (ov.universe == "file") cfg.universe = daisy::ExperimentConfig::UniverseKind::file;
    else throw daisy::format_error("unknown universe '" + ov.universe + "'");
  }
  if (ov.u) cfg.u = ov.u;
  if (ov.zipf_s >= 0.0) cfg.zipf_s = ov.zipf_s;
  if (!ov.zipf_side.empty()) {
    if (ov.zipf_side == "p") cfg.zipf_side = daisy::Side::p;
    else if (ov.zipf_side == "q") cfg.zipf_side = daisy::Side::q;
    else throw daisy::format_error("zipf side must be p or q");
  }
  if (!ov.weights.empty()) cfg.weights_path = ov.weights;
  if (ov.n) cfg.n = ov.n;
  if (ov.fpr >= 0.0) cfg.F_user = ov.fpr;
  if (ov.trials) cfg.trials = ov.trials;
  if (ov.seed >= 0) cfg.seed0 = static_cast<std::uint64_t>(ov.seed);
  if (!ov.out.empty()) cfg.out_path = ov.out;
  if (ov.threads) cfg.threads = ov.threads;
  if (!ov.kinds.empty()) {
    cfg.kinds.clear();
    for (const auto& k : daisy::detail::split_commas(ov.kinds))
      cfg.kinds.push_back(daisy::detail::parse_kind(k));
  }
  if (!ov.sweep_fpr.empty()) {
    cfg.sweep_fpr.clear();
    for (const auto& v : daisy::detail::split_commas(ov.sweep_fpr))
      cfg.sweep_fpr.push_back(daisy::detail::parse_double(v, "--sweep-fpr"));
  }
  if (!ov.sweep_zipf.empty()) {
    cfg.sweep_zipf.clear();
    for (const auto& v : daisy::detail::split_commas(ov.sweep_zipf))
      cfg.sweep_zipf.push_back(daisy::detail::parse_double(v, "--sweep-zipf"));
  }
  daisy::apply_env_overrides(cfg);
  return cfg;
}

int dispatch(const std::string& sub, const daisy::ExperimentConfig& cfg) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path);
    if (!file) {
      std::cerr << "cannot open output file " << cfg.out_path << '\n';
      return daisy::kExitUsage;
    }
    out = &file;
  }
  if (sub == "plan") return daisy::cmd_plan(cfg, *out, std::cerr);
  if (sub == "simulate") return daisy::cmd_simulate(cfg, *out, std::cerr);
  if (sub == "sweep") return daisy::cmd_sweep(cfg, *out, std::cerr);
  if (sub == "audit") return daisy::cmd_audit(cfg, *out, std::cerr);
  std::cerr << "unknown subcommand " << sub << '\n';
  return daisy::kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"daisy: distribution-aware Bloom filter planner and experiment harness"};
  app.require_subcommand(1);

  Overrides ov;
  auto* plan = app.add_subcommand("plan", "print plan summary and bound values");
  auto* simulate = app.add_subcommand("simulate", "run seeded trials with exact FPR");
  auto* sweep = app.add_subcommand("sweep", "sweep F or zipf exponent");
  auto* audit = app.add_subcommand("audit", "encoding-length and Kraft audit");
  for (auto* cmd : {plan, simulate, sweep, audit}) add_common_flags(cmd, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : daisy::kExitUsage;
  }

  try {
    const daisy::ExperimentConfig cfg = effective_config(ov);
    return dispatch(app.get_subcommands().front()->get_name(), cfg);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return daisy::kExitUsage;
  }
}
