#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "daisy/common.hpp"
#include "daisy/distribution.hpp"
#include "daisy/planner.hpp"

namespace daisy {

// Experiment description. Parsed from a `key = value` config file, then
// overridable by command-line flags; the DAISY_SEED environment variable
// wins over both for the seed.
struct ExperimentConfig {
  enum class UniverseKind { uniform, zipf, file };

  UniverseKind universe = UniverseKind::uniform;
  std::uint64_t u = std::uint64_t{1} << 20;
  double zipf_s = 1.0;
  Side zipf_side = Side::q;
  std::string weights_path;

  std::uint64_t n = 1000;
  double F_user = 0.01;
  std::vector<PlanKind> kinds = {PlanKind::daisy};
  std::uint64_t trials = 1;
  std::uint64_t seed0 = 1;
  std::string out_path;  // empty = stdout
  unsigned threads = 1;

  std::vector<double> sweep_fpr;
  std::vector<double> sweep_zipf;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
  double v{};
  const auto* b = s.data();
  const auto* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw format_error("config: bad number for " + key + ": '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  std::uint64_t v{};
  const auto* b = s.data();
  const auto* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw format_error("config: bad integer for " + key + ": '" + s + "'");
  return v;
}

inline PlanKind parse_kind(const std::string& s) {
  if (s == "daisy") return PlanKind::daisy;
  if (s == "standard") return PlanKind::standard;
  if (s == "ratio_only") return PlanKind::ratio_only;
  throw format_error("config: unknown plan kind '" + s + "'");
}

}  // namespace detail

// Lines of `key = value`; `#` starts a comment; unknown keys are errors.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw format_error("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key == "universe") {
      if (val == "uniform") cfg.universe = ExperimentConfig::UniverseKind::uniform;
      else if (val == "zipf") cfg.universe = ExperimentConfig::UniverseKind::zipf;
      else if (val == "file") cfg.universe = ExperimentConfig::UniverseKind::file;
      else throw format_error("config: unknown universe '" + val + "'");
    } else if (key == "u") {
      cfg.u = detail::parse_u64(val, key);
    } else if (key == "zipf_s") {
      cfg.zipf_s = detail::parse_double(val, key);
    } else if (key == "zipf_side") {
      if (val == "p") cfg.zipf_side = Side::p;
      else if (val == "q") cfg.zipf_side = Side::q;
      else throw format_error("config: zipf_side must be p or q");
    } else if (key == "weights") {
      cfg.weights_path = val;
    } else if (key == "n") {
      cfg.n = detail::parse_u64(val, key);
    } else if (key == "fpr") {
      cfg.F_user = detail::parse_double(val, key);
    } else if (key == "kinds") {
      cfg.kinds.clear();
      for (const auto& k : detail::split_commas(val))
        cfg.kinds.push_back(detail::parse_kind(k));
    } else if (key == "trials") {
      cfg.trials = detail::parse_u64(val, key);
    } else if (key == "seed") {
      cfg.seed0 = detail::parse_u64(val, key);
    } else if (key == "out") {
      cfg.out_path = val;
    } else if (key == "threads") {
      cfg.threads = static_cast<unsigned>(detail::parse_u64(val, key));
    } else if (key == "sweep_fpr") {
      cfg.sweep_fpr.clear();
      for (const auto& v : detail::split_commas(val))
        cfg.sweep_fpr.push_back(detail::parse_double(v, key));
    } else if (key == "sweep_zipf") {
      cfg.sweep_zipf.clear();
      for (const auto& v : detail::split_commas(val))
        cfg.sweep_zipf.push_back(detail::parse_double(v, key));
    } else {
      throw format_error("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw format_error("config: cannot open " + path.string());
  return parse_config(in);
}

inline void apply_env_overrides(ExperimentConfig& cfg) {
  if (const char* env = std::getenv("DAISY_SEED"))
    cfg.seed0 = detail::parse_u64(env, "DAISY_SEED");
}

inline void validate(const ExperimentConfig& cfg) {
  if (!(cfg.F_user > 0.0 && cfg.F_user < 1.0))
    throw std::invalid_argument("config: fpr must be in (0,1)");
  if (cfg.n == 0) throw std::invalid_argument("config: n must be >= 1");
  if (cfg.trials == 0) throw std::invalid_argument("config: trials must be >= 1");
  if (cfg.u == 0) throw std::invalid_argument("config: u must be >= 1");
  if (cfg.u > kMaxEnumerableUniverse)
    throw std::invalid_argument("config: u exceeds the enumeration cap 2^24");
  if (cfg.kinds.empty()) throw std::invalid_argument("config: no plan kinds");
  if (cfg.universe == ExperimentConfig::UniverseKind::file && cfg.weights_path.empty())
    throw std::invalid_argument("config: universe=file requires weights=");
  if (cfg.universe == ExperimentConfig::UniverseKind::zipf && !(cfg.zipf_s >= 0.0))
    throw std::invalid_argument("config: zipf_s must be >= 0");
}

inline std::shared_ptr<const WeightedUniverse> make_universe(const ExperimentConfig& cfg) {
  switch (cfg.universe) {
    case ExperimentConfig::UniverseKind::uniform:
      return std::make_shared<const WeightedUniverse>(uniform(cfg.u));
    case ExperimentConfig::UniverseKind::zipf:
      return std::make_shared<const WeightedUniverse>(zipf(cfg.u, cfg.zipf_s, cfg.zipf_side));
    case ExperimentConfig::UniverseKind::file: {
      auto w = std::make_shared<const WeightedUniverse>(load_weights(cfg.weights_path));
      if (w->size() > kMaxEnumerableUniverse)
        throw std::invalid_argument("config: weights file exceeds the enumeration cap 2^24");
      return w;
    }
  }
  throw std::logic_error("make_universe: unreachable");
}

}  // namespace daisy
