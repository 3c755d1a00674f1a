#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "simtac/bench/run.hpp"
#include "simtac/harness/config.hpp"
#include "simtac/trial.hpp"

namespace simtac::harness {

/// Descriptive array sections for a benchmark's region, used when sweeps
/// synthesize directives.
inline std::vector<ArraySection> default_inputs(const std::string& benchmark,
                                                const bench::BenchmarkParams& params) {
  auto vec5 = [](const char* base) {
    return ArraySection{base, {5, 0}, SectionDim::literal(5), SectionDim::literal(1)};
  };
  if (benchmark == "blackscholes" || benchmark == "binomial") return {vec5("option")};
  if (benchmark == "kmeans")
    return {ArraySection{"point",
                         {params.kmeans_dims, 0},
                         SectionDim::literal(params.kmeans_dims),
                         SectionDim::literal(1)}};
  return {ArraySection{"x", {1, 0}, SectionDim::literal(1), SectionDim::literal(1)}};
}

inline std::vector<ArraySection> default_outputs(const std::string& benchmark,
                                                 const bench::BenchmarkParams& params) {
  if (benchmark == "blackscholes" || benchmark == "binomial")
    return {ArraySection{"price", {1, 0}, SectionDim::literal(1), SectionDim::literal(1)}};
  if (benchmark == "kmeans")
    return {ArraySection{"dist",
                         {params.kmeans_k, 0},
                         SectionDim::literal(params.kmeans_k),
                         SectionDim::literal(1)}};
  return {ArraySection{"y", {1, 0}, SectionDim::literal(1), SectionDim::literal(1)}};
}

inline Level level_from_name(const std::string& name) {
  if (name == "thread") return Level::kThread;
  if (name == "warp") return Level::kWarp;
  if (name == "team" || name == "block") return Level::kTeam;
  throw ConfigFileError("unknown hierarchy level '" + name + "'");
}

inline PerfoKind perfo_kind_from_name(const std::string& name) {
  if (name == "small") return PerfoKind::kSmall;
  if (name == "large") return PerfoKind::kLarge;
  if (name == "ini") return PerfoKind::kIni;
  if (name == "fini") return PerfoKind::kFini;
  if (name == "herded_small") return PerfoKind::kHerdedSmall;
  if (name == "herded_large") return PerfoKind::kHerdedLarge;
  throw ConfigFileError("unknown perforation kind '" + name + "'");
}

/// Expand a sweep config into the full Cartesian product of trial setups,
/// in deterministic order.
inline std::vector<bench::TrialSetup> expand_sweep(const SweepConfig& c) {
  const bench::BenchmarkInfo& info = bench::benchmark_info(c.benchmark);

  std::vector<int> ipts = c.items_per_thread;
  if (ipts.empty()) ipts.push_back(info.default_items_per_thread);
  std::vector<int> teams = c.num_teams;
  if (teams.empty()) teams.push_back(0);  // derived
  std::vector<std::string> levels = c.levels;
  if (levels.empty()) levels.push_back("thread");

  std::vector<ApproxSpec> specs;
  auto inputs = default_inputs(c.benchmark, c.params);
  auto outputs = default_outputs(c.benchmark, c.params);

  if (c.technique == "taf") {
    std::vector<int> hs = c.h_size.empty() ? std::vector<int>{1} : c.h_size;
    std::vector<int> ps = c.p_size.empty() ? std::vector<int>{2} : c.p_size;
    std::vector<double> ts = c.taf_threshold.empty() ? std::vector<double>{1.0} : c.taf_threshold;
    for (int h : hs)
      for (int p : ps)
        for (double t : ts) {
          ApproxSpec s;
          s.technique = Technique::kTaf;
          s.taf = TafConfig{h, p, t};
          s.outputs = outputs;
          specs.push_back(std::move(s));
        }
  } else if (c.technique == "iact") {
    std::vector<int> sizes = c.table_size.empty() ? std::vector<int>{2} : c.table_size;
    std::vector<double> ts =
        c.iact_threshold.empty() ? std::vector<double>{0.5} : c.iact_threshold;
    std::vector<int> tpws = c.tables_per_warp;
    bool default_tpw = tpws.empty();
    if (default_tpw) tpws.push_back(0);
    for (int size : sizes)
      for (double t : ts)
        for (int tpw : tpws) {
          ApproxSpec s;
          s.technique = Technique::kIact;
          IactConfig cfg;
          cfg.table_size = size;
          cfg.threshold = t;
          if (!default_tpw) cfg.tables_per_warp = tpw;
          s.iact = cfg;
          s.inputs = inputs;
          s.outputs = outputs;
          specs.push_back(std::move(s));
        }
  } else {
    std::vector<std::string> kinds =
        c.perfo_kinds.empty() ? std::vector<std::string>{"small"} : c.perfo_kinds;
    for (const std::string& kname : kinds) {
      PerfoKind kind = perfo_kind_from_name(kname);
      if (perfo_kind_uses_modulus(kind)) {
        std::vector<int> ms = c.perfo_modulus.empty() ? std::vector<int>{2} : c.perfo_modulus;
        for (int m : ms) {
          ApproxSpec s;
          s.technique = Technique::kPerfo;
          s.perfo = PerfoConfig{kind, m, 0};
          specs.push_back(std::move(s));
        }
      } else {
        std::vector<int> percents =
            c.perfo_percent.empty() ? std::vector<int>{10} : c.perfo_percent;
        for (int pc : percents) {
          ApproxSpec s;
          s.technique = Technique::kPerfo;
          s.perfo = PerfoConfig{kind, 0, pc};
          specs.push_back(std::move(s));
        }
      }
    }
  }

  std::vector<bench::TrialSetup> points;
  for (const ApproxSpec& spec : specs)
    for (const std::string& level : levels)
      for (int ipt : ipts)
        for (int team_count : teams)
          for (int trial = 0; trial < c.trials; ++trial) {
            bench::TrialSetup s;
            s.benchmark = c.benchmark;
            s.spec = spec;
            s.spec->level = level_from_name(level);
            s.n = c.n;
            s.seed = c.seed;
            s.trial = trial;
            s.items_per_thread = ipt;
            s.num_teams = team_count;
            s.threads_per_team = c.threads_per_team;
            s.warp_size = c.warp_size;
            s.shared_mem_budget_bytes = c.shared_mem_budget_bytes;
            s.cost = c.cost;
            s.params = c.params;
            points.push_back(std::move(s));
          }
  return points;
}

struct SweepSummary {
  std::size_t total_points = 0;
  std::size_t resumed_points = 0;
  std::size_t failed_points = 0;
};

/// Record skeleton carrying only the configuration fields, used for sort
/// keys before a point has run.
inline TrialRecord record_shell(const bench::TrialSetup& s) {
  const bench::BenchmarkInfo& info = bench::benchmark_info(s.benchmark);
  long long n = s.n > 0 ? s.n : info.default_n;
  TrialRecord rec;
  rec.benchmark = s.benchmark;
  rec.technique = s.spec ? technique_name(s.spec->technique) : "none";
  rec.directive = s.spec ? unparse(*s.spec) : "";
  rec.level = s.spec ? level_name(s.spec->level) : "thread";
  rec.n = n;
  rec.seed = s.seed;
  rec.trial = s.trial;
  GridConfig grid = bench::resolve_grid(info, s, n);
  rec.num_teams = grid.num_teams;
  rec.threads_per_team = grid.threads_per_team;
  rec.warp_size = grid.warp_size;
  rec.items_per_thread = grid.items_per_thread;
  return rec;
}

/// Execute every point of a sweep and write the records file.
///
/// Completed points stream into <out>.part as they finish, so a killed
/// sweep resumes without recomputation; the final file is rewritten in one
/// canonically sorted pass and renamed into place, making repeated or
/// resumed invocations byte-identical. Points run concurrently when jobs>1;
/// determinism is unaffected because each record is a pure function of its
/// setup and the output order is canonical.
inline SweepSummary execute_sweep(const SweepConfig& config, const std::string& out_path,
                                  int jobs = 1, std::ostream* progress = nullptr) {
  namespace fs = std::filesystem;
  std::vector<bench::TrialSetup> points = expand_sweep(config);
  if (progress)
    *progress << "sweep: " << points.size() << " points (" << config.technique << " on "
              << config.benchmark << ")\n";

  // Keys of planned points; duplicates in the plan are rejected so the
  // record count invariant holds.
  std::set<std::string> planned;
  std::vector<std::string> point_keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    point_keys[i] = record_shell(points[i]).sort_key();
    if (!planned.insert(point_keys[i]).second)
      throw ConfigFileError("sweep expands to duplicate point: " + point_keys[i]);
  }

  // Resume from a previous partial run; records from some other sweep's
  // leftover .part are dropped rather than merged.
  const std::string part_path = out_path + ".part";
  std::map<std::string, TrialRecord> done;
  if (fs::exists(part_path)) {
    std::ifstream in(part_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      TrialRecord r = from_csv(line);
      if (planned.count(r.sort_key())) done.emplace(r.sort_key(), std::move(r));
    }
  }

  SweepSummary summary;
  summary.total_points = points.size();
  summary.resumed_points = done.size();

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!done.count(point_keys[i])) todo.push_back(i);

  std::ofstream part(part_path, std::ios::app);
  if (!part) throw SimtError("cannot open " + part_path + " for append");

  bench::BaselineCache cache;
  std::mutex write_mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      std::size_t slot = next.fetch_add(1);
      if (slot >= todo.size()) return;
      TrialRecord rec = bench::run_trial(points[todo[slot]], cache);
      std::lock_guard<std::mutex> lock(write_mu);
      part << to_csv(rec) << "\n";
      part.flush();
      done.emplace(rec.sort_key(), std::move(rec));
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  part.close();

  for (const auto& [key, rec] : done)
    if (rec.status != "OK") ++summary.failed_points;

  // Canonical final write: sorted records, atomic rename.
  const std::string tmp_path = out_path + ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::trunc);
    if (!out) throw SimtError("cannot open " + tmp_path + " for write");
    out << kTrialCsvHeader << "\n";
    for (const auto& [key, rec] : done) out << to_csv(rec) << "\n";
  }
  fs::rename(tmp_path, out_path);
  {
    std::ofstream sidecar(out_path + ".json", std::ios::trunc);
    sidecar << sweep_config_json(config).dump(2) << "\n";
  }
  fs::remove(part_path);
  return summary;
}

inline std::vector<TrialRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimtError("cannot open records file " + path);
  std::vector<TrialRecord> records;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line == kTrialCsvHeader) {
      first = false;
      continue;
    }
    first = false;
    records.push_back(from_csv(line));
  }
  return records;
}

}  // namespace simtac::harness
