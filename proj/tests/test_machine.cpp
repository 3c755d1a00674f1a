#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include "simtac/machine.hpp"

using namespace simtac;

namespace {

GridConfig grid_of(int teams, int threads, int warp, int ipt) {
  GridConfig g;
  g.num_teams = teams;
  g.threads_per_team = threads;
  g.warp_size = warp;
  g.items_per_thread = ipt;
  return g;
}

}  // namespace

TEST_CASE("grid-stride assignment: thread t handles t, t+G, t+2G") {
  GridConfig g = grid_of(1, 4, 4, 2);
  std::map<int, std::vector<long long>> indices;
  launch_kernel(g, 8, [&](LaneCtx& ctx) { indices[ctx.thread_id].push_back(ctx.index); });
  CHECK(indices[0] == std::vector<long long>{0, 4});
  CHECK(indices[3] == std::vector<long long>{3, 7});
}

TEST_CASE("empty launch produces zeroed stats") {
  KernelStats st = launch_kernel(grid_of(1, 4, 4, 2), 0, [](LaneCtx&) {});
  CHECK(st.total_invocations == 0);
  CHECK(st.total_warp_steps == 0);
  CHECK(st.estimated_cost == 0.0);
}

TEST_CASE("ragged tail leaves the final warp partially active") {
  // 2 teams x 64 threads, warp 32, n=200: step 1 covers indices 128..199,
  // so threads 72..127 sit out and the warp over threads 64..95 is partial.
  GridConfig g = grid_of(2, 64, 32, 2);
  KernelStats st = launch_kernel(g, 200, [](LaneCtx&) {});
  CHECK(st.total_invocations == 200);
  // step 0: 4 full warps; step 1: threads 0..71 active -> warps 0,1 full,
  // warp 2 partial (active lanes 64..71), warp 3 idle.
  CHECK(st.total_warp_steps == 7);
}

TEST_CASE("coverage: each index in [0,n) is evaluated exactly once") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 40; ++iter) {
    int teams = 1 + static_cast<int>(rng() % 4);
    int warp = 1 << (rng() % 4);  // 1..8
    int warps_per_team = 1 + static_cast<int>(rng() % 3);
    int threads = warp * warps_per_team;
    long long capacity_needed = 1 + static_cast<long long>(rng() % 300);
    int ipt = static_cast<int>((capacity_needed + teams * threads - 1) / (teams * threads)) + 1;
    GridConfig g = grid_of(teams, threads, warp, ipt);
    std::multiset<long long> seen;
    launch_kernel(g, capacity_needed, [&](LaneCtx& ctx) { seen.insert(ctx.index); });
    REQUIRE(seen.size() == static_cast<std::size_t>(capacity_needed));
    long long expect = 0;
    for (long long v : seen) CHECK(v == expect++);
  }
}

TEST_CASE("determinism: identical launches give identical stats") {
  GridConfig g = grid_of(3, 32, 8, 4);
  auto body = [](LaneCtx& ctx) { (void)ctx; };
  KernelStats a = launch_kernel(g, 300, body);
  KernelStats b = launch_kernel(g, 300, body);
  CHECK(a.total_invocations == b.total_invocations);
  CHECK(a.total_warp_steps == b.total_warp_steps);
  CHECK(a.estimated_cost == b.estimated_cost);
  CHECK(a.divergent_warp_steps == b.divergent_warp_steps);
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(grid_of(0, 4, 4, 1).validate(), ConfigError);
  CHECK_THROWS_AS(grid_of(1, 6, 4, 1).validate(), ConfigError);  // warp must divide
  CHECK_THROWS_AS(launch_kernel(grid_of(1, 4, 4, 2), 9, [](LaneCtx&) {}), ConfigError);
}

TEST_CASE("arena overflow is a launch-time error with the shortfall") {
  GridConfig g = grid_of(1, 4, 4, 1);
  g.shared_mem_budget_bytes = 8;
  CHECK_THROWS_AS(launch_kernel(g, 4,
                                [](LaneCtx& ctx) {
                                  ctx.team->arena().alloc_bytes(64, "big");
                                }),
                  ArenaOverflowError);
}

TEST_CASE("uniform barriers pass, divergent barriers abort with the missing set") {
  GridConfig g = grid_of(1, 4, 4, 1);
  KernelStats ok = launch_kernel(g, 4, [](LaneCtx& ctx) { ctx.team_barrier(); });
  CHECK_FALSE(ok.barrier_divergence_detected);

  try {
    launch_kernel(g, 4, [](LaneCtx& ctx) {
      if (ctx.thread_id != 2) ctx.team_barrier();
    });
    FAIL("expected barrier divergence");
  } catch (const BarrierDivergenceError& e) {
    CHECK(e.team_id == 0);
    CHECK(e.missing_threads == std::vector<int>{2});
  }
}

TEST_CASE("accumulate_cost encodes the lockstep max-cost rule") {
  CostModel model;
  WarpContext warp;
  warp.lane_count = 4;
  warp.active_mask = 0b1111;

  KernelStats st;
  std::vector<LanePath> all_approx(4, LanePath::kApprox);
  double c = accumulate_cost(st, warp, all_approx, model);
  CHECK(c == model.cost_approx);
  CHECK(st.divergent_warp_steps == 0);
  CHECK(st.total_warp_steps == 1);

  std::vector<LanePath> mixed = {LanePath::kAccurate, LanePath::kApprox, LanePath::kApprox,
                                 LanePath::kApprox};
  c = accumulate_cost(st, warp, mixed, model);
  CHECK(c == model.cost_accurate);
  CHECK(st.divergent_warp_steps == 1);

  std::vector<LanePath> idle(4, LanePath::kInactive);
  c = accumulate_cost(st, warp, idle, model);
  CHECK(c == 0.0);
  CHECK(st.total_warp_steps == 2);
}

TEST_CASE("technique overhead and vote cost are added on top") {
  CostModel model;
  WarpContext warp;
  warp.lane_count = 2;
  warp.active_mask = 0b11;
  KernelStats st;
  std::vector<LanePath> paths(2, LanePath::kApprox);
  double c = accumulate_cost(st, warp, paths, model, 0.3, true);
  CHECK(c == Catch::Approx(model.cost_approx + 0.3 + model.cost_decision));
}

TEST_CASE("estimated cost is non-decreasing in every cost model field") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<LanePath> paths(8);
    for (LanePath& p : paths)
      p = static_cast<LanePath>(rng() % 3);
    WarpContext warp;
    warp.lane_count = 8;
    warp.active_mask = 0xff;
    bool vote = rng() % 2;
    double overhead_units = static_cast<double>(rng() % 4);

    CostModel base;
    auto cost_with = [&](const CostModel& m) {
      KernelStats st;
      return accumulate_cost(st, warp, paths, m, overhead_units * m.cost_lookup_per_entry,
                             vote);
    };
    double c0 = cost_with(base);
    for (int field = 0; field < 4; ++field) {
      CostModel bumped = base;
      if (field == 0) bumped.cost_accurate += 0.5;
      if (field == 1) bumped.cost_approx += 0.04;  // stays below cost_accurate
      if (field == 2) bumped.cost_lookup_per_entry += 0.05;
      if (field == 3) bumped.cost_decision += 0.05;
      CHECK(cost_with(bumped) >= c0);
    }
  }
}

TEST_CASE("cost model validation") {
  CostModel m;
  m.cost_approx = -1.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  CostModel warn;
  warn.cost_approx = 2.0;
  CHECK_FALSE(warn.warnings().empty());
}
