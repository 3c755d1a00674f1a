#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <vector>

#include "simtac/arena.hpp"
#include "simtac/cost.hpp"
#include "simtac/grid.hpp"
#include "simtac/warp.hpp"

namespace simtac {

class TeamState;

/// Per-lane view of one region invocation. `index` is the work item, `step`
/// the grid-stride step, `encounter` the sub-invocation within the step for
/// kernels that hit the region more than once per item.
struct LaneCtx {
  int thread_id = 0;       // global
  int thread_in_team = 0;  // local to the team
  int team_id = 0;
  int warp_id = 0;  // global warp index
  int lane_id = 0;  // within the warp
  long long index = 0;
  long long step = 0;
  int encounter = 0;
  bool active = false;
  TeamState* team = nullptr;

  inline void team_barrier();
};

/// Book-keeping for one team during a launch: its shared arena plus barrier
/// arrival counts for the current lockstep step.
class TeamState {
 public:
  TeamState(int team_id, int threads, std::size_t arena_bytes)
      : team_id_(team_id), arrivals_(threads, 0), arena_(arena_bytes) {}

  int team_id() const { return team_id_; }
  SharedArena& arena() { return arena_; }
  const SharedArena& arena() const { return arena_; }

  void record_barrier(int thread_in_team) { arrivals_[thread_in_team] += 1; }

  void begin_step() { std::fill(arrivals_.begin(), arrivals_.end(), 0); }

  /// Checks that every thread listed in `participants` (global ids paired
  /// with team-local ids) arrived at the same number of barriers this step.
  /// Returns the global ids of threads that fell short, empty when uniform.
  std::vector<int> end_step(const std::vector<std::pair<int, int>>& participants) const {
    int max_arrivals = 0;
    for (auto [gid, lid] : participants)
      max_arrivals = std::max(max_arrivals, arrivals_[lid]);
    std::vector<int> missing;
    for (auto [gid, lid] : participants)
      if (arrivals_[lid] < max_arrivals) missing.push_back(gid);
    return missing;
  }

 private:
  int team_id_;
  std::vector<int> arrivals_;
  SharedArena arena_;
};

void LaneCtx::team_barrier() {
  if (team) team->record_barrier(thread_in_team);
}

namespace detail {

/// Work index owned by (thread or team) `owner` at grid-stride step `step`,
/// with `stride` total owners. Negative means no work.
inline long long stride_index(int owner, long long step, long long stride, long long n) {
  long long idx = owner + step * stride;
  return idx < n ? idx : -1;
}

inline long long step_count(long long n, long long stride) {
  return n <= 0 ? 0 : (n + stride - 1) / stride;
}

}  // namespace detail

/// Deterministic lockstep launch of a plain (non-approximated) kernel body.
/// Every index in [0, n) is visited exactly once on the grid-stride
/// schedule; lanes of a warp advance together; every active lane is charged
/// the accurate path. The body may call LaneCtx::team_barrier(); if the
/// active threads of a team disagree on barrier arrivals within a step the
/// launch aborts with BarrierDivergenceError (the deadlock model).
inline KernelStats launch_kernel(const GridConfig& grid, long long n,
                                 const std::function<void(LaneCtx&)>& body,
                                 const CostModel& model = {}) {
  grid.validate();
  model.validate();
  grid.check_coverage(WorkMapping::kPerThread, n);

  KernelStats stats;
  const int total_threads = grid.total_threads();
  const long long steps = detail::step_count(n, total_threads);

  std::vector<std::unique_ptr<TeamState>> teams;
  teams.reserve(grid.num_teams);
  for (int t = 0; t < grid.num_teams; ++t)
    teams.push_back(std::make_unique<TeamState>(t, grid.threads_per_team,
                                                grid.shared_mem_budget_bytes));

  std::vector<LanePath> paths(grid.warp_size);
  for (long long step = 0; step < steps; ++step) {
    for (int team = 0; team < grid.num_teams; ++team) {
      TeamState& ts = *teams[team];
      ts.begin_step();
      std::vector<std::pair<int, int>> participants;
      for (int w = 0; w < grid.warps_per_team(); ++w) {
        WarpContext warp;
        warp.warp_id = team * grid.warps_per_team() + w;
        warp.lane_count = grid.warp_size;
        warp.step_index = step;
        std::fill(paths.begin(), paths.end(), LanePath::kInactive);
        for (int lane = 0; lane < grid.warp_size; ++lane) {
          int local = w * grid.warp_size + lane;
          int tid = team * grid.threads_per_team + local;
          long long idx = detail::stride_index(tid, step, total_threads, n);
          if (idx < 0) continue;
          warp.active_mask |= std::uint64_t{1} << lane;
          LaneCtx ctx{tid, local, team, warp.warp_id, lane, idx, step, 0, true, &ts};
          body(ctx);
          paths[lane] = LanePath::kAccurate;
          stats.total_invocations += 1;
          participants.emplace_back(tid, local);
        }
        accumulate_cost(stats, warp, paths, model);
      }
      std::vector<int> missing = ts.end_step(participants);
      if (!missing.empty()) {
        stats.barrier_divergence_detected = true;
        throw BarrierDivergenceError(team, step, std::move(missing));
      }
    }
  }
  return stats;
}

}  // namespace simtac
