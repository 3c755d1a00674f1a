#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "simtac/bench/run.hpp"
#include "simtac/cost.hpp"
#include "simtac/directive.hpp"
#include "simtac/errors.hpp"

namespace simtac::harness {

using json = nlohmann::json;

class ConfigFileError : public SimtError {
 public:
  explicit ConfigFileError(const std::string& what) : SimtError("config error: " + what) {}
};

/// Single-point run: one benchmark, one directive string (empty for the
/// accurate baseline), optional grid overrides.
struct RunConfig {
  std::string benchmark;
  std::string directive;
  long long n = 0;
  std::uint64_t seed = 42;
  int trials = 1;
  int items_per_thread = 0;
  int num_teams = 0;
  int threads_per_team = 0;
  int warp_size = 0;
  std::size_t shared_mem_budget_bytes = 48 * 1024;
  CostModel cost;
  bench::BenchmarkParams params;
};

/// Cartesian sweep: per-parameter value lists for one technique on one
/// benchmark. Empty lists fall back to singleton defaults.
struct SweepConfig {
  std::string benchmark;
  std::string technique;  // taf | iact | perfo
  long long n = 0;
  std::uint64_t seed = 42;
  int trials = 1;
  std::vector<int> items_per_thread;
  std::vector<int> num_teams;
  std::vector<std::string> levels;
  std::vector<int> h_size;
  std::vector<int> p_size;
  std::vector<double> taf_threshold;
  std::vector<int> table_size;
  std::vector<int> tables_per_warp;
  std::vector<double> iact_threshold;
  std::vector<std::string> perfo_kinds;
  std::vector<int> perfo_modulus;
  std::vector<int> perfo_percent;
  int threads_per_team = 0;
  int warp_size = 0;
  std::size_t shared_mem_budget_bytes = 48 * 1024;
  CostModel cost;
  bench::BenchmarkParams params;
};

namespace detail {

/// Thresholds may appear as numbers or as the string "inf".
inline double threshold_from(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    double d;
    if (parse_double(v.get<std::string>(), d)) return d;
  }
  throw ConfigFileError(std::string(what) + " must be a number or \"inf\"");
}

inline void read_cost(const json& j, CostModel& cost) {
  if (!j.contains("cost")) return;
  const json& c = j.at("cost");
  if (c.contains("cost_accurate")) cost.cost_accurate = c.at("cost_accurate").get<double>();
  if (c.contains("cost_approx")) cost.cost_approx = c.at("cost_approx").get<double>();
  if (c.contains("cost_lookup_per_entry"))
    cost.cost_lookup_per_entry = c.at("cost_lookup_per_entry").get<double>();
  if (c.contains("cost_decision")) cost.cost_decision = c.at("cost_decision").get<double>();
  if (c.contains("latency_hiding_warps"))
    cost.latency_hiding_warps = c.at("latency_hiding_warps").get<int>();
}

inline void read_params(const json& j, bench::BenchmarkParams& p) {
  if (!j.contains("params")) return;
  const json& c = j.at("params");
  if (c.contains("binomial_lattice_steps"))
    p.binomial_lattice_steps = c.at("binomial_lattice_steps").get<int>();
  if (c.contains("kmeans_dims")) p.kmeans_dims = c.at("kmeans_dims").get<int>();
  if (c.contains("kmeans_k")) p.kmeans_k = c.at("kmeans_k").get<int>();
  if (c.contains("kmeans_max_iters")) p.kmeans_max_iters = c.at("kmeans_max_iters").get<int>();
  if (c.contains("kmeans_separation"))
    p.kmeans_separation = c.at("kmeans_separation").get<double>();
  if (c.contains("bs_base_block")) p.bs_base_block = c.at("bs_base_block").get<int>();
}

inline void read_grid_overrides(const json& j, int& items_per_thread, int& num_teams,
                                int& threads_per_team, int& warp_size) {
  if (j.contains("items_per_thread") && j.at("items_per_thread").is_number())
    items_per_thread = j.at("items_per_thread").get<int>();
  if (j.contains("num_teams") && j.at("num_teams").is_number())
    num_teams = j.at("num_teams").get<int>();
  if (j.contains("threads_per_team")) threads_per_team = j.at("threads_per_team").get<int>();
  if (j.contains("warp_size")) warp_size = j.at("warp_size").get<int>();
}

}  // namespace detail

inline RunConfig load_run_config(const json& j) {
  RunConfig c;
  if (!j.contains("benchmark")) throw ConfigFileError("run config needs a benchmark");
  c.benchmark = j.at("benchmark").get<std::string>();
  if (j.contains("directive")) c.directive = j.at("directive").get<std::string>();
  if (j.contains("n")) c.n = j.at("n").get<long long>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  detail::read_grid_overrides(j, c.items_per_thread, c.num_teams, c.threads_per_team,
                              c.warp_size);
  if (j.contains("shared_mem_budget_bytes"))
    c.shared_mem_budget_bytes = j.at("shared_mem_budget_bytes").get<std::size_t>();
  detail::read_cost(j, c.cost);
  detail::read_params(j, c.params);
  if (c.trials < 1) throw ConfigFileError("trials must be >= 1");
  return c;
}

inline SweepConfig load_sweep_config(const json& j) {
  SweepConfig c;
  if (!j.contains("benchmark")) throw ConfigFileError("sweep config needs a benchmark");
  if (!j.contains("technique")) throw ConfigFileError("sweep config needs a technique");
  c.benchmark = j.at("benchmark").get<std::string>();
  c.technique = j.at("technique").get<std::string>();
  if (c.technique != "taf" && c.technique != "iact" && c.technique != "perfo")
    throw ConfigFileError("technique must be taf, iact, or perfo");
  if (j.contains("n")) c.n = j.at("n").get<long long>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("items_per_thread"))
    c.items_per_thread = j.at("items_per_thread").get<std::vector<int>>();
  if (j.contains("num_teams")) c.num_teams = j.at("num_teams").get<std::vector<int>>();
  if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<std::string>>();
  if (j.contains("taf")) {
    const json& t = j.at("taf");
    if (t.contains("h_size")) c.h_size = t.at("h_size").get<std::vector<int>>();
    if (t.contains("p_size")) c.p_size = t.at("p_size").get<std::vector<int>>();
    if (t.contains("threshold"))
      for (const json& v : t.at("threshold"))
        c.taf_threshold.push_back(detail::threshold_from(v, "taf threshold"));
  }
  if (j.contains("iact")) {
    const json& t = j.at("iact");
    if (t.contains("table_size")) c.table_size = t.at("table_size").get<std::vector<int>>();
    if (t.contains("tables_per_warp"))
      c.tables_per_warp = t.at("tables_per_warp").get<std::vector<int>>();
    if (t.contains("threshold"))
      for (const json& v : t.at("threshold"))
        c.iact_threshold.push_back(detail::threshold_from(v, "iact threshold"));
  }
  if (j.contains("perfo")) {
    const json& t = j.at("perfo");
    if (t.contains("kinds")) c.perfo_kinds = t.at("kinds").get<std::vector<std::string>>();
    if (t.contains("modulus")) c.perfo_modulus = t.at("modulus").get<std::vector<int>>();
    if (t.contains("skip_percent"))
      c.perfo_percent = t.at("skip_percent").get<std::vector<int>>();
  }
  if (j.contains("threads_per_team")) c.threads_per_team = j.at("threads_per_team").get<int>();
  if (j.contains("warp_size")) c.warp_size = j.at("warp_size").get<int>();
  if (j.contains("shared_mem_budget_bytes"))
    c.shared_mem_budget_bytes = j.at("shared_mem_budget_bytes").get<std::size_t>();
  detail::read_cost(j, c.cost);
  detail::read_params(j, c.params);
  if (c.trials < 1) throw ConfigFileError("trials must be >= 1");
  return c;
}

/// Canonical JSON echo of a sweep config, written as the records sidecar.
inline json sweep_config_json(const SweepConfig& c) {
  json j;
  j["benchmark"] = c.benchmark;
  j["technique"] = c.technique;
  j["n"] = c.n;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["items_per_thread"] = c.items_per_thread;
  j["num_teams"] = c.num_teams;
  j["levels"] = c.levels;
  json taf, iact, perfo;
  taf["h_size"] = c.h_size;
  taf["p_size"] = c.p_size;
  taf["threshold"] = json::array();
  for (double v : c.taf_threshold)
    taf["threshold"].push_back(std::isinf(v) ? json("inf") : json(v));
  iact["table_size"] = c.table_size;
  iact["tables_per_warp"] = c.tables_per_warp;
  iact["threshold"] = json::array();
  for (double v : c.iact_threshold)
    iact["threshold"].push_back(std::isinf(v) ? json("inf") : json(v));
  perfo["kinds"] = c.perfo_kinds;
  perfo["modulus"] = c.perfo_modulus;
  perfo["skip_percent"] = c.perfo_percent;
  j["taf"] = taf;
  j["iact"] = iact;
  j["perfo"] = perfo;
  j["threads_per_team"] = c.threads_per_team;
  j["warp_size"] = c.warp_size;
  json cost;
  cost["cost_accurate"] = c.cost.cost_accurate;
  cost["cost_approx"] = c.cost.cost_approx;
  cost["cost_lookup_per_entry"] = c.cost.cost_lookup_per_entry;
  cost["cost_decision"] = c.cost.cost_decision;
  cost["latency_hiding_warps"] = c.cost.latency_hiding_warps;
  j["cost"] = cost;
  return j;
}

/// Counts like "2^27" or plain integers.
inline double parse_count_expr(const std::string& text) {
  auto caret = text.find('^');
  try {
    if (caret == std::string::npos) return std::stod(text);
    double base = std::stod(text.substr(0, caret));
    double expo = std::stod(text.substr(caret + 1));
    return std::pow(base, expo);
  } catch (const std::exception&) {
    throw ConfigFileError("cannot parse count '" + text + "'");
  }
}

/// Byte sizes like "16GiB", "512MB", "2^34", or plain byte counts.
inline double parse_byte_size(const std::string& text) {
  static const std::pair<const char*, double> suffixes[] = {
      {"kib", 1024.0},          {"mib", 1048576.0},
      {"gib", 1073741824.0},    {"tib", 1099511627776.0},
      {"kb", 1e3},              {"mb", 1e6},
      {"gb", 1e9},              {"tb", 1e12},
      {"b", 1.0},
  };
  std::string lowered;
  for (char ch : text) lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (auto [suffix, scale] : suffixes) {
    std::string s(suffix);
    if (lowered.size() > s.size() && lowered.substr(lowered.size() - s.size()) == s) {
      std::string head = text.substr(0, lowered.size() - s.size());
      while (!head.empty() && head.back() == ' ') head.pop_back();
      return parse_count_expr(head) * scale;
    }
  }
  return parse_count_expr(text);
}

}  // namespace simtac::harness
