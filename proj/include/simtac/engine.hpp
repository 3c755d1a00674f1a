#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "simtac/cost.hpp"
#include "simtac/directive.hpp"
#include "simtac/hierarchy.hpp"
#include "simtac/iact.hpp"
#include "simtac/machine.hpp"
#include "simtac/perfo.hpp"
#include "simtac/taf.hpp"

namespace simtac {

/// One approximable code region. The engine drives it per (lane, step,
/// encounter): load_input fills the iACT lookup key, evaluate runs the
/// accurate path (and may call LaneCtx::team_barrier()), store commits the
/// region outputs. `encounters` gives the number of region hits per work
/// item (default 1); data-dependent counts model loops around the region.
/// evaluate must be a pure function of the lane's work item, so that the
/// loaded key determines the outputs.
struct Region {
  int input_dims = 0;
  int output_dims = 1;
  std::function<int(const LaneCtx&)> encounters;
  std::function<void(const LaneCtx&, std::span<double>)> load_input;
  std::function<void(LaneCtx&, std::span<const double>, std::span<double>)> evaluate;
  std::function<void(const LaneCtx&, std::span<const double>)> store;
};

struct LaunchResult {
  KernelStats stats;
  /// Device-time proxy. The device retires at most latency_hiding_warps
  /// warps' worth of cost per unit time, so an oversubscribed launch is
  /// throughput-bound (total cost / capacity) while an undersubscribed one
  /// is bound by its slowest warp and pays the latency-hiding stall.
  double device_time = 0.0;
  int resident_warps = 0;

  double approx_rate() const {
    return stats.total_invocations == 0
               ? 0.0
               : static_cast<double>(stats.approx_invocations) / stats.total_invocations;
  }
  double divergent_fraction() const {
    return stats.total_warp_steps == 0
               ? 0.0
               : static_cast<double>(stats.divergent_warp_steps) / stats.total_warp_steps;
  }
};

namespace detail {

/// Launch-scoped technique state, budgeted against the per-team shared
/// arena before the first step runs so oversized configurations fail at
/// launch, never mid-kernel. Tables and windows die with the launch.
struct TechniqueState {
  std::optional<TafConfig> taf;
  std::optional<IactConfig> iact;
  std::optional<PerfoConfig> perfo;
  Level level = Level::kThread;

  std::vector<TafState> taf_states;            // per thread
  std::vector<std::vector<MemoTable>> tables;  // per warp
  int tables_per_warp = 0;
  std::vector<long long> perfo_counters;  // per thread
  std::vector<long long> herded_counters; // per warp (shared lockstep counter)
  std::vector<ArenaCell> vote_cells;      // per team
};

inline TechniqueState bind_technique(const GridConfig& grid, const Region& region,
                                     const ApproxSpec* spec,
                                     std::vector<std::unique_ptr<TeamState>>& teams) {
  TechniqueState st;
  if (!spec) return st;
  spec->validate();
  st.level = spec->level;

  if (spec->technique == Technique::kTaf) {
    st.taf = *spec->taf;
    st.taf_states.reserve(grid.total_threads());
    for (int t = 0; t < grid.total_threads(); ++t)
      st.taf_states.emplace_back(*st.taf, region.output_dims);
    std::size_t per_thread = taf_state_bytes(st.taf->h_size, region.output_dims);
    for (auto& team : teams)
      for (int t = 0; t < grid.threads_per_team; ++t)
        team->arena().alloc_bytes(per_thread, "taf_state");
  } else if (spec->technique == Technique::kIact) {
    st.iact = *spec->iact;
    if (region.input_dims < 1) throw ConfigError("iACT requires a region with inputs");
    st.iact->input_dims = region.input_dims;
    st.iact->output_dims = region.output_dims;
    st.tables_per_warp = st.iact->resolve_tables_per_warp(grid.warp_size);
    std::size_t per_warp = table_group_bytes(st.tables_per_warp, st.iact->table_size,
                                             region.input_dims, region.output_dims);
    st.tables.resize(grid.total_warps());
    for (auto& group : st.tables)
      for (int t = 0; t < st.tables_per_warp; ++t)
        group.emplace_back(st.iact->table_size, region.input_dims, region.output_dims);
    for (auto& team : teams)
      for (int w = 0; w < grid.warps_per_team(); ++w)
        team->arena().alloc_bytes(per_warp, "iact_tables");
  } else {
    st.perfo = *spec->perfo;
    st.perfo->validate();
    st.perfo_counters.assign(grid.total_threads(), 0);
    st.herded_counters.assign(grid.total_warps(), 0);
  }

  if (st.level == Level::kTeam)
    for (auto& team : teams) st.vote_cells.push_back(team->arena().alloc_cell("team_vote"));
  return st;
}

struct LaneWork {
  LaneCtx ctx;
  bool in_round = false;   // active this encounter round
  bool predicate = false;  // activation criterion
  std::optional<MemoTable::Hit> hit;
};

}  // namespace detail

/// Execute a region over [0, n) on the simulated machine, optionally under
/// an approximation spec (null spec = accurate baseline). Deterministic:
/// identical inputs give bit-identical stats and outputs. Aborts with
/// ArenaOverflowError at launch or BarrierDivergenceError mid-run.
inline LaunchResult run_region(const GridConfig& grid, long long n, WorkMapping mapping,
                               const Region& region, const ApproxSpec* spec,
                               const CostModel& model = {}) {
  grid.validate();
  model.validate();
  grid.check_coverage(mapping, n);
  if (!region.evaluate) throw ConfigError("region has no evaluate function");
  if (region.input_dims > 0 && !region.load_input)
    throw ConfigError("region declares inputs but has no load_input");

  const int total_threads = grid.total_threads();
  const int warps_per_team = grid.warps_per_team();
  const long long stride = mapping == WorkMapping::kPerTeam ? grid.num_teams : total_threads;
  const long long steps = detail::step_count(n, stride);

  std::vector<std::unique_ptr<TeamState>> teams;
  teams.reserve(grid.num_teams);
  for (int t = 0; t < grid.num_teams; ++t)
    teams.push_back(std::make_unique<TeamState>(t, grid.threads_per_team,
                                                grid.shared_mem_budget_bytes));

  detail::TechniqueState tech = detail::bind_technique(grid, region, spec, teams);
  const bool voting = spec && tech.level != Level::kThread;

  LaunchResult result;
  std::vector<double> warp_cost(grid.total_warps(), 0.0);
  std::vector<bool> warp_touched(grid.total_warps(), false);

  std::vector<detail::LaneWork> lanes(grid.threads_per_team);
  std::vector<std::vector<double>> lane_inputs(
      grid.threads_per_team, std::vector<double>(std::max(1, region.input_dims)));
  std::vector<std::vector<double>> lane_outputs(
      grid.threads_per_team, std::vector<double>(region.output_dims));
  std::vector<LanePath> paths(grid.warp_size);

  auto input_span = [&](int local) -> std::span<const double> {
    return {lane_inputs[local].data(), static_cast<std::size_t>(region.input_dims)};
  };

  // Per-thread trip counts for INI/FINI perforation (encounter-uniform
  // kernels only; the bound rewrite needs the trip known up front).
  std::vector<long long> trips;
  if (tech.perfo &&
      (tech.perfo->kind == PerfoKind::kIni || tech.perfo->kind == PerfoKind::kFini)) {
    if (region.encounters)
      throw ConfigError("INI/FINI perforation requires a fixed trip count per thread");
    trips.assign(total_threads, 0);
    for (int tid = 0; tid < total_threads; ++tid) {
      int owner = mapping == WorkMapping::kPerTeam ? tid / grid.threads_per_team : tid;
      long long cnt = 0;
      for (long long s = 0; s < steps; ++s)
        if (detail::stride_index(owner, s, stride, n) >= 0) ++cnt;
      trips[tid] = cnt;
    }
  }

  for (long long step = 0; step < steps; ++step) {
    for (int team = 0; team < grid.num_teams; ++team) {
      TeamState& ts = *teams[team];
      ts.begin_step();
      std::vector<std::pair<int, int>> participants;

      int rounds = 0;
      for (int local = 0; local < grid.threads_per_team; ++local) {
        detail::LaneWork& lw = lanes[local];
        int tid = team * grid.threads_per_team + local;
        int owner = mapping == WorkMapping::kPerTeam ? team : tid;
        long long idx = detail::stride_index(owner, step, stride, n);
        lw.ctx = LaneCtx{tid,
                         local,
                         team,
                         team * warps_per_team + local / grid.warp_size,
                         local % grid.warp_size,
                         idx,
                         step,
                         0,
                         idx >= 0,
                         &ts};
        lw.in_round = false;
        if (idx >= 0) {
          participants.emplace_back(tid, local);
          rounds = std::max(rounds, region.encounters ? region.encounters(lw.ctx) : 1);
        }
      }

      for (int round = 0; round < rounds; ++round) {
        // Round activity, input loads, activation predicates (iACT read
        // phase runs here, against tables as left by earlier rounds).
        int team_active = 0;
        for (int local = 0; local < grid.threads_per_team; ++local) {
          detail::LaneWork& lw = lanes[local];
          lw.ctx.encounter = round;
          lw.in_round =
              lw.ctx.active && round < (region.encounters ? region.encounters(lw.ctx) : 1);
          lw.predicate = false;
          lw.hit.reset();
          if (!lw.in_round) continue;
          ++team_active;

          if (region.input_dims > 0)
            region.load_input(lw.ctx,
                              {lane_inputs[local].data(),
                               static_cast<std::size_t>(region.input_dims)});

          if (tech.taf) {
            lw.predicate = tech.taf_states[lw.ctx.thread_id].predicting();
          } else if (tech.iact) {
            MemoTable& table = tech.tables[lw.ctx.warp_id][lane_table_index(
                lw.ctx.lane_id, grid.warp_size, tech.tables_per_warp)];
            lw.hit = table.lookup(input_span(local), tech.iact->threshold);
            lw.predicate = lw.hit.has_value();
          } else if (tech.perfo) {
            long long key = perfo_kind_is_herded(tech.perfo->kind)
                                ? tech.herded_counters[lw.ctx.warp_id]
                                : tech.perfo_counters[lw.ctx.thread_id];
            std::optional<long long> trip;
            if (!trips.empty()) trip = trips[lw.ctx.thread_id];
            lw.predicate = should_skip(*tech.perfo, key, trip);
          }
        }
        if (team_active == 0) continue;

        // Team-level decision: warp ballots summed through the shared
        // counter, ordered by one framework barrier that every thread of
        // the team participating in this step reaches.
        std::optional<bool> team_decision;
        if (voting && tech.level == Level::kTeam) {
          ts.arena().write_cell(tech.vote_cells[team], 0.0);
          std::vector<WarpContext> wctxs;
          for (int w = 0; w < warps_per_team; ++w) {
            WarpContext wc;
            wc.warp_id = team * warps_per_team + w;
            wc.lane_count = grid.warp_size;
            wc.step_index = step;
            for (int lane = 0; lane < grid.warp_size; ++lane)
              if (lanes[w * grid.warp_size + lane].in_round)
                wc.active_mask |= std::uint64_t{1} << lane;
            if (wc.active_mask) wctxs.push_back(wc);
          }
          VoteResult vr = decide_team(
              wctxs,
              [&](int warp_id, int lane) {
                int local = (warp_id - team * warps_per_team) * grid.warp_size + lane;
                return lanes[local].predicate;
              },
              ts.arena(), tech.vote_cells[team]);
          for (auto [gid, local] : participants) ts.record_barrier(local);
          team_decision = vr.decision;
        }

        for (int w = 0; w < warps_per_team; ++w) {
          WarpContext wc;
          wc.warp_id = team * warps_per_team + w;
          wc.lane_count = grid.warp_size;
          wc.step_index = step;
          for (int lane = 0; lane < grid.warp_size; ++lane)
            if (lanes[w * grid.warp_size + lane].in_round)
              wc.active_mask |= std::uint64_t{1} << lane;
          if (!wc.active_mask) continue;
          warp_touched[wc.warp_id] = true;

          std::optional<bool> group_decision = team_decision;
          if (voting && tech.level == Level::kWarp) {
            VoteResult vr = decide_warp(
                wc, [&](int lane) { return lanes[w * grid.warp_size + lane].predicate; });
            group_decision = vr.decision;
          }

          std::fill(paths.begin(), paths.end(), LanePath::kInactive);
          double overhead = 0.0;
          std::vector<int> miss_evaluated;
          for (int lane = 0; lane < grid.warp_size; ++lane) {
            int local = w * grid.warp_size + lane;
            detail::LaneWork& lw = lanes[local];
            if (!lw.in_round) continue;
            bool approx = group_decision ? *group_decision : lw.predicate;
            auto& out = lane_outputs[local];

            // Deciding whether to approximate costs a table scan on every
            // iACT invocation, hit or miss.
            if (tech.iact) overhead += model.cost_lookup_per_entry * tech.iact->table_size;

            if (approx) {
              if (tech.taf) {
                tech.taf_states[lw.ctx.thread_id].emit_approx({out.data(), out.size()});
                region.store(lw.ctx, {out.data(), out.size()});
              } else if (tech.iact) {
                MemoTable& table = tech.tables[lw.ctx.warp_id][lane_table_index(
                    lw.ctx.lane_id, grid.warp_size, tech.tables_per_warp)];
                if (lw.hit) {
                  region.store(lw.ctx, table.entry_output(lw.hit->slot));
                } else if (table.occupancy() > 0) {
                  // Forced by a group vote: emit the nearest cached value
                  // regardless of threshold.
                  region.store(lw.ctx, table.entry_output(table.nearest_slot(input_span(local))));
                } else {
                  // Empty table, nothing to return; fall back to the
                  // accurate path and cache the fresh value.
                  approx = false;
                }
              }
              // Perforation skip: output left untouched.
            }

            if (!approx) {
              region.evaluate(lw.ctx, input_span(local), {out.data(), out.size()});
              region.store(lw.ctx, {out.data(), out.size()});
              if (tech.taf)
                tech.taf_states[lw.ctx.thread_id].observe_accurate({out.data(), out.size()});
              if (tech.iact && !lw.hit) miss_evaluated.push_back(lane);
            }

            paths[lane] = approx ? LanePath::kApprox : LanePath::kAccurate;
            result.stats.total_invocations += 1;
            if (approx) result.stats.approx_invocations += 1;
          }

          // iACT write phase: per table, one writer among this round's
          // evaluated misses inserts at the round-robin slot.
          if (tech.iact && !miss_evaluated.empty()) {
            for (int t = 0; t < tech.tables_per_warp; ++t) {
              std::vector<int> candidates;
              for (int lane : miss_evaluated)
                if (lane_table_index(lane, grid.warp_size, tech.tables_per_warp) == t)
                  candidates.push_back(lane);
              if (candidates.empty()) continue;
              MemoTable& table = tech.tables[wc.warp_id][t];
              int writer = select_writer(
                  candidates, [&](int lane) { return input_span(w * grid.warp_size + lane); },
                  table);
              int local = w * grid.warp_size + writer;
              table.insert(input_span(local),
                           {lane_outputs[local].data(), lane_outputs[local].size()});
            }
          }

          if (tech.perfo) {
            for (int lane = 0; lane < grid.warp_size; ++lane)
              if (lanes[w * grid.warp_size + lane].in_round)
                tech.perfo_counters[team * grid.threads_per_team + w * grid.warp_size + lane] += 1;
            tech.herded_counters[wc.warp_id] += 1;
          }

          double step_cost = accumulate_cost(
              result.stats, wc, {paths.data(), static_cast<std::size_t>(grid.warp_size)},
              model, overhead, voting);
          warp_cost[wc.warp_id] += step_cost;
        }
      }

      std::vector<int> missing = ts.end_step(participants);
      if (!missing.empty()) {
        result.stats.barrier_divergence_detected = true;
        throw BarrierDivergenceError(team, step, std::move(missing));
      }
    }
  }

  for (int w = 0; w < grid.total_warps(); ++w)
    if (warp_touched[w]) ++result.resident_warps;
  double slowest = 0.0;
  double total = 0.0;
  for (double c : warp_cost) {
    slowest = std::max(slowest, c);
    total += c;
  }
  double throughput_bound = total / model.latency_hiding_warps;
  result.device_time =
      std::max(slowest, throughput_bound) * model.stall_factor(result.resident_warps);
  return result;
}

}  // namespace simtac
