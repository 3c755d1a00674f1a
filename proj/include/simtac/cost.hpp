#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simtac/errors.hpp"
#include "simtac/warp.hpp"

namespace simtac {

/// Abstract cost constants replacing hardware timing. Units are arbitrary;
/// only ratios matter. latency_hiding_warps is the occupancy proxy: launches
/// with fewer resident warps than this are charged a stall factor, modeling
/// the device's inability to hide latency at low parallelism.
struct CostModel {
  double cost_accurate = 1.0;
  double cost_approx = 0.05;
  double cost_lookup_per_entry = 0.02;
  double cost_decision = 0.01;
  int latency_hiding_warps = 128;

  void validate() const {
    if (cost_accurate < 0 || cost_approx < 0 || cost_lookup_per_entry < 0 ||
        cost_decision < 0)
      throw ConfigError("cost model constants must be non-negative");
    if (latency_hiding_warps < 1)
      throw ConfigError("latency_hiding_warps must be positive");
  }

  /// Nonfatal configuration smells, surfaced to the caller.
  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (cost_approx > cost_accurate)
      w.push_back("cost_approx exceeds cost_accurate; approximation will never pay off");
    return w;
  }

  /// Stall multiplier for a launch with the given number of resident warps.
  double stall_factor(int active_warps) const {
    if (active_warps <= 0) return 1.0;
    return std::max(1.0, static_cast<double>(latency_hiding_warps) / active_warps);
  }
};

enum class LanePath : std::uint8_t { kInactive = 0, kAccurate = 1, kApprox = 2 };

struct KernelStats {
  std::uint64_t total_invocations = 0;
  std::uint64_t approx_invocations = 0;
  std::uint64_t divergent_warp_steps = 0;
  std::uint64_t total_warp_steps = 0;
  double estimated_cost = 0.0;
  bool barrier_divergence_detected = false;
};

/// Charge one warp lockstep step. Lockstep max-cost rule: if any active lane
/// takes the accurate path the whole warp waits for it, so the step costs
/// cost_accurate; an all-approximate step costs cost_approx. Technique
/// overhead (e.g. iACT lookups) is added on top, as is one cost_decision
/// when a hierarchy vote happened. A step with mixed paths among active
/// lanes counts as divergent. Steps with no active lane are not counted.
/// Returns the step cost so callers can keep per-warp totals.
inline double accumulate_cost(KernelStats& stats, const WarpContext& warp,
                              std::span<const LanePath> paths, const CostModel& model,
                              double technique_overhead = 0.0,
                              bool vote_occurred = false) {
  (void)warp;
  int accurate = 0, approx = 0;
  for (LanePath p : paths) {
    if (p == LanePath::kAccurate) ++accurate;
    if (p == LanePath::kApprox) ++approx;
  }
  if (accurate + approx == 0) return 0.0;

  double cost = (accurate > 0 ? model.cost_accurate : model.cost_approx);
  cost += technique_overhead;
  if (vote_occurred) cost += model.cost_decision;

  stats.total_warp_steps += 1;
  if (accurate > 0 && approx > 0) stats.divergent_warp_steps += 1;
  stats.estimated_cost += cost;
  return cost;
}

}  // namespace simtac
