#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <span>

namespace simtac {

/// State of one warp at a lockstep point. Lane liveness is carried in
/// active_mask; step_index is shared by every lane of the warp.
struct WarpContext {
  int warp_id = 0;
  int lane_count = 32;
  std::uint64_t active_mask = 0;
  long long step_index = 0;

  bool lane_active(int lane) const {
    return lane >= 0 && lane < lane_count && (active_mask >> lane) & 1u;
  }
  int active_count() const { return std::popcount(active_mask); }

  static std::uint64_t full_mask(int lanes) {
    return lanes >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << lanes) - 1;
  }
};

/// Warp ballot: bit i is set iff lane i is active and its predicate holds.
/// Inactive lanes contribute 0.
inline std::uint64_t ballot(const WarpContext& warp,
                            const std::function<bool(int)>& predicate) {
  std::uint64_t mask = 0;
  for (int lane = 0; lane < warp.lane_count; ++lane)
    if (warp.lane_active(lane) && predicate(lane)) mask |= std::uint64_t{1} << lane;
  return mask;
}

inline std::uint64_t ballot(const WarpContext& warp, std::span<const bool> predicates) {
  return ballot(warp, [&](int lane) {
    return lane < static_cast<int>(predicates.size()) && predicates[lane];
  });
}

inline int popcount(std::uint64_t mask) { return std::popcount(mask); }

}  // namespace simtac
