#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "simtac/bench/binomial.hpp"
#include "simtac/bench/blackscholes.hpp"
#include "simtac/bench/kmeans.hpp"
#include "simtac/bench/synthetic.hpp"
#include "simtac/engine.hpp"
#include "simtac/metrics.hpp"
#include "simtac/trial.hpp"

namespace simtac::bench {

struct BenchmarkInfo {
  std::string id;
  long long default_n = 0;
  int threads_per_team = 64;
  int warp_size = 32;
  int default_items_per_thread = 1;
  WorkMapping mapping = WorkMapping::kPerThread;
  std::string metric = "mape";
  bool iterative = false;
};

/// Benchmark-specific knobs that are not part of the swept space.
struct BenchmarkParams {
  int binomial_lattice_steps = 32;
  int kmeans_dims = 2;
  int kmeans_k = 8;
  int kmeans_max_iters = 40;
  double kmeans_separation = 8.0;
  int bs_base_block = 512;
};

inline const std::vector<BenchmarkInfo>& benchmark_table() {
  static const std::vector<BenchmarkInfo> table = {
      {"blackscholes", 65536, 64, 32, 16, WorkMapping::kPerThread, "mape", false},
      {"binomial", 16384, 64, 32, 8, WorkMapping::kPerTeam, "mape", false},
      {"kmeans", 4096, 64, 32, 4, WorkMapping::kPerThread, "mcr", true},
      {"synthetic-constant", 16384, 64, 32, 32, WorkMapping::kPerThread, "mape", false},
      {"synthetic-slow-drift", 16384, 64, 32, 32, WorkMapping::kPerThread, "mape", false},
      {"synthetic-noise", 16384, 64, 32, 32, WorkMapping::kPerThread, "mape", false},
  };
  return table;
}

inline const BenchmarkInfo& benchmark_info(const std::string& id) {
  for (const BenchmarkInfo& b : benchmark_table())
    if (b.id == id) return b;
  throw ConfigError("unknown benchmark '" + id + "'");
}

inline std::optional<SyntheticProfile> synthetic_profile_of(const std::string& id) {
  if (id == "synthetic-constant") return SyntheticProfile::kConstant;
  if (id == "synthetic-slow-drift") return SyntheticProfile::kSlowDrift;
  if (id == "synthetic-noise") return SyntheticProfile::kNoise;
  return std::nullopt;
}

struct TrialSetup {
  std::string benchmark;
  std::optional<ApproxSpec> spec;  // empty = accurate run
  long long n = 0;                 // 0 = benchmark default
  std::uint64_t seed = 42;
  int trial = 0;
  int items_per_thread = 0;  // 0 = default
  int num_teams = 0;         // 0 = derived from n and items_per_thread
  int threads_per_team = 0;  // 0 = default
  int warp_size = 0;         // 0 = default
  std::size_t shared_mem_budget_bytes = 48 * 1024;
  CostModel cost;
  BenchmarkParams params;
};

inline GridConfig resolve_grid(const BenchmarkInfo& info, const TrialSetup& s, long long n) {
  GridConfig g;
  g.threads_per_team = s.threads_per_team > 0 ? s.threads_per_team : info.threads_per_team;
  g.warp_size = s.warp_size > 0 ? s.warp_size : info.warp_size;
  g.items_per_thread = s.items_per_thread > 0 ? s.items_per_thread : info.default_items_per_thread;
  g.shared_mem_budget_bytes = s.shared_mem_budget_bytes;
  if (s.num_teams > 0) {
    g.num_teams = s.num_teams;
  } else {
    long long per_team = info.mapping == WorkMapping::kPerTeam
                             ? g.items_per_thread
                             : static_cast<long long>(g.threads_per_team) * g.items_per_thread;
    g.num_teams = static_cast<int>((n + per_team - 1) / per_team);
    if (g.num_teams < 1) g.num_teams = 1;
  }
  return g;
}

/// Accurate-run artifacts shared by every trial of one (benchmark, n, seed):
/// the QoI vector plus the reference-grid device time the speedups are
/// measured against (the best-parallelism baseline, per the sweep design).
struct Baseline {
  std::vector<double> qoi_real;
  std::vector<int> qoi_labels;
  double device_time = 0.0;
  long long iterations = 0;
};

class BaselineCache {
 public:
  const Baseline& get(const std::string& key, const std::function<Baseline()>& make) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, make()).first;
    return it->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, Baseline> cache_;
};

namespace detail {

struct RunOutput {
  std::vector<double> qoi_real;
  std::vector<int> qoi_labels;
  LaunchResult launch;
  long long iterations = 0;
  bool converged = true;
};

inline RunOutput run_benchmark(const BenchmarkInfo& info, const TrialSetup& s, long long n,
                               const GridConfig& grid, const ApproxSpec* spec) {
  RunOutput out;
  std::uint64_t input_seed = s.seed + static_cast<std::uint64_t>(s.trial);

  if (info.id == "blackscholes") {
    auto portfolio = make_bs_portfolio(n, input_seed, s.params.bs_base_block);
    out.qoi_real.assign(n, 0.0);
    Region region = blackscholes_region(portfolio, out.qoi_real);
    out.launch = run_region(grid, n, info.mapping, region, spec, s.cost);
  } else if (info.id == "binomial") {
    auto portfolio = make_binomial_portfolio(n, input_seed);
    out.qoi_real.assign(n, 0.0);
    Region region = binomial_region(portfolio, s.params.binomial_lattice_steps, out.qoi_real);
    out.launch = run_region(grid, n, info.mapping, region, spec, s.cost);
  } else if (info.id == "kmeans") {
    KmeansProblem problem = make_blobs(n, s.params.kmeans_dims, s.params.kmeans_k, input_seed,
                                       s.params.kmeans_separation);
    KmeansResult res = kmeans_benchmark(problem, grid, spec, s.cost, s.params.kmeans_max_iters);
    out.qoi_labels = res.assignments;
    out.launch.stats = res.stats;
    out.launch.device_time = res.device_time;
    out.iterations = res.iterations;
    out.converged = res.converged;
  } else if (auto profile = synthetic_profile_of(info.id)) {
    out.qoi_real.assign(n, 0.0);
    Region region = synthetic_region(*profile, input_seed, out.qoi_real);
    out.launch = run_region(grid, n, info.mapping, region, spec, s.cost);
  } else {
    throw ConfigError("unknown benchmark '" + info.id + "'");
  }
  return out;
}

}  // namespace detail

/// Execute one sweep point: the cached accurate baseline at the reference
/// grid plus the (possibly approximated) run at the trial grid. Simulator
/// aborts come back as FAILED records rather than exceptions.
inline TrialRecord run_trial(const TrialSetup& s, BaselineCache& cache) {
  const BenchmarkInfo& info = benchmark_info(s.benchmark);
  long long n = s.n > 0 ? s.n : info.default_n;

  TrialRecord rec;
  rec.benchmark = info.id;
  rec.technique = s.spec ? technique_name(s.spec->technique) : "none";
  rec.directive = s.spec ? unparse(*s.spec) : "";
  rec.level = s.spec ? level_name(s.spec->level) : "thread";
  rec.n = n;
  rec.seed = s.seed;
  rec.trial = s.trial;
  rec.error_metric = info.metric;

  GridConfig grid = resolve_grid(info, s, n);
  rec.num_teams = grid.num_teams;
  rec.threads_per_team = grid.threads_per_team;
  rec.warp_size = grid.warp_size;
  rec.items_per_thread = grid.items_per_thread;

  std::string base_key = info.id + "/" + std::to_string(n) + "/" +
                         std::to_string(s.seed + static_cast<std::uint64_t>(s.trial));
  try {
    const Baseline& base = cache.get(base_key, [&]() {
      TrialSetup ref = s;
      ref.items_per_thread = 0;
      ref.num_teams = 0;
      ref.threads_per_team = 0;
      ref.warp_size = 0;
      GridConfig ref_grid = resolve_grid(info, ref, n);
      detail::RunOutput out = detail::run_benchmark(info, s, n, ref_grid, nullptr);
      Baseline b;
      b.qoi_real = std::move(out.qoi_real);
      b.qoi_labels = std::move(out.qoi_labels);
      b.device_time = out.launch.device_time;
      b.iterations = out.iterations;
      return b;
    });

    detail::RunOutput run = detail::run_benchmark(info, s, n, grid, s.spec ? &*s.spec : nullptr);

    if (info.metric == "mcr")
      rec.error_value = mcr(base.qoi_labels, run.qoi_labels);
    else
      rec.error_value = mape(base.qoi_real, run.qoi_real);
    rec.approx_rate = run.launch.approx_rate();
    rec.divergent_fraction = run.launch.divergent_fraction();
    rec.baseline_cost = base.device_time;
    rec.approx_cost = run.launch.device_time;
    rec.est_speedup = rec.approx_cost > 0 ? rec.baseline_cost / rec.approx_cost : 0.0;
    rec.baseline_iters = base.iterations;
    rec.approx_iters = run.iterations;
  } catch (const BarrierDivergenceError& e) {
    rec.status = "FAILED";
    rec.reason = e.what();
  } catch (const ArenaOverflowError& e) {
    rec.status = "FAILED";
    rec.reason = e.what();
  }
  return rec;
}

}  // namespace simtac::bench
