#pragma once

#include <functional>
#include <span>
#include <string>

#include "simtac/arena.hpp"
#include "simtac/errors.hpp"
#include "simtac/warp.hpp"

namespace simtac {

/// Which group collectively decides the execution path. "team" and "block"
/// are synonyms; the clause grammar says team.
enum class Level { kThread, kWarp, kTeam };

inline std::string level_name(Level l) {
  switch (l) {
    case Level::kThread: return "thread";
    case Level::kWarp: return "warp";
    case Level::kTeam: return "team";
  }
  return "?";
}

struct VoteResult {
  int yes_votes = 0;
  int group_size = 0;  // active participants
  bool decision = false;
};

/// Strict majority; ties fall to the accurate path.
inline bool majority_decision(int yes_votes, int group_size) {
  return 2 * yes_votes > group_size;
}

inline bool decide_thread(bool predicate) { return predicate; }

/// Warp-collective vote: ballot the active lanes' activation criteria,
/// popcount, strict majority over the active lanes. Every active lane
/// receives the same decision.
inline VoteResult decide_warp(const WarpContext& warp,
                              const std::function<bool(int)>& predicate) {
  std::uint64_t mask = ballot(warp, predicate);
  VoteResult r;
  r.yes_votes = popcount(mask);
  r.group_size = warp.active_count();
  r.decision = majority_decision(r.yes_votes, r.group_size);
  return r;
}

/// Team-collective vote: each warp ballots and its leader atomically adds
/// the popcount to a zeroed shared counter; after all warps contribute the
/// total decides by strict majority over the team's active threads. The
/// total is a commutative sum, so any warp ordering yields the same result.
inline VoteResult decide_team(std::span<const WarpContext> warps,
                              const std::function<bool(int, int)>& predicate,
                              SharedArena& arena, ArenaCell counter) {
  int active_threads = 0;
  for (const WarpContext& w : warps) {
    std::uint64_t mask = ballot(w, [&](int lane) { return predicate(w.warp_id, lane); });
    atomic_add_shared(arena, counter, static_cast<double>(popcount(mask)));
    active_threads += w.active_count();
  }
  VoteResult r;
  r.yes_votes = static_cast<int>(arena.read_cell(counter));
  r.group_size = active_threads;
  r.decision = majority_decision(r.yes_votes, r.group_size);
  return r;
}

}  // namespace simtac
