#pragma once

#include <string>

#include "simtac/errors.hpp"

namespace simtac {

/// How work indices map onto the simulated machine.
///  - kPerThread: thread t handles indices t, t+G, t+2G, ... for G total threads.
///  - kPerTeam:   team b handles indices b, b+T, b+2T, ... for T teams; every
///                thread of the team participates in the same index (used by
///                kernels where a block cooperatively computes one item).
enum class WorkMapping { kPerThread, kPerTeam };

struct GridConfig {
  int num_teams = 1;
  int threads_per_team = 32;
  int warp_size = 32;
  int items_per_thread = 1;
  std::size_t shared_mem_budget_bytes = 48 * 1024;

  int total_threads() const { return num_teams * threads_per_team; }
  int warps_per_team() const { return threads_per_team / warp_size; }
  int total_warps() const { return num_teams * warps_per_team(); }

  void validate() const {
    if (num_teams < 1) throw ConfigError("num_teams must be positive");
    if (threads_per_team < 1) throw ConfigError("threads_per_team must be positive");
    if (warp_size < 1 || warp_size > 64)
      throw ConfigError("warp_size must be in [1, 64]");
    if (threads_per_team % warp_size != 0)
      throw ConfigError("warp_size (" + std::to_string(warp_size) +
                        ") must divide threads_per_team (" +
                        std::to_string(threads_per_team) + ")");
    if (items_per_thread < 1) throw ConfigError("items_per_thread must be positive");
  }

  /// Work capacity of the grid under the given mapping. A launch with
  /// n > capacity is rejected.
  long long capacity(WorkMapping mapping) const {
    if (mapping == WorkMapping::kPerTeam)
      return static_cast<long long>(num_teams) * items_per_thread;
    return static_cast<long long>(total_threads()) * items_per_thread;
  }

  void check_coverage(WorkMapping mapping, long long n) const {
    if (n < 0) throw ConfigError("problem size must be non-negative");
    if (n > capacity(mapping))
      throw ConfigError("grid capacity " + std::to_string(capacity(mapping)) +
                        " cannot cover problem size " + std::to_string(n) +
                        " (increase num_teams, threads_per_team, or items_per_thread)");
  }
};

}  // namespace simtac
