#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "simtac/errors.hpp"
#include "simtac/warp.hpp"

namespace simtac {

struct IactConfig {
  int table_size = 1;
  double threshold = 0.0;
  /// Unset means one table per thread (resolved to warp_size at launch).
  std::optional<int> tables_per_warp;
  /// 0 = unresolved; bound from the region at launch.
  int input_dims = 0;
  int output_dims = 0;

  void validate() const {
    if (table_size < 1) throw ConfigError("iACT table size must be >= 1");
    if (!(threshold >= 0.0)) throw ConfigError("iACT threshold must be >= 0");
    if (tables_per_warp && *tables_per_warp < 1)
      throw ConfigError("tables_per_warp must be >= 1");
  }

  int resolve_tables_per_warp(int warp_size) const {
    int tpw = tables_per_warp.value_or(warp_size);
    if (tpw < 1 || warp_size % tpw != 0)
      throw ConfigError("tables_per_warp (" + std::to_string(tpw) +
                        ") must divide warp_size (" + std::to_string(warp_size) + ")");
    return tpw;
  }

  bool operator==(const IactConfig&) const = default;
};

inline double euclid_dist(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ConfigError("euclid_dist dimension mismatch: " + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()));
  double ssq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    ssq += d * d;
  }
  return std::sqrt(ssq);
}

/// Fixed-capacity input->output cache with round-robin replacement.
/// Insertions land at slots 0, 1, ..., capacity-1, 0, ... regardless of
/// lookup traffic.
class MemoTable {
 public:
  MemoTable(int capacity, int input_dims, int output_dims)
      : capacity_(capacity),
        input_dims_(input_dims),
        output_dims_(output_dims),
        inputs_(static_cast<std::size_t>(capacity) * input_dims, 0.0),
        outputs_(static_cast<std::size_t>(capacity) * output_dims, 0.0) {
    if (capacity < 1) throw ConfigError("MemoTable capacity must be >= 1");
    if (input_dims < 1 || output_dims < 1)
      throw ConfigError("MemoTable dimensions must be >= 1");
  }

  int capacity() const { return capacity_; }
  int occupancy() const { return occupancy_; }
  int rr_cursor() const { return rr_cursor_; }
  int input_dims() const { return input_dims_; }
  int output_dims() const { return output_dims_; }

  std::span<const double> entry_input(int slot) const {
    return {inputs_.data() + static_cast<std::size_t>(slot) * input_dims_,
            static_cast<std::size_t>(input_dims_)};
  }
  std::span<const double> entry_output(int slot) const {
    return {outputs_.data() + static_cast<std::size_t>(slot) * output_dims_,
            static_cast<std::size_t>(output_dims_)};
  }

  struct Hit {
    int slot;
    double distance;
  };

  /// Closest stored entry within the distance threshold; ties broken by the
  /// lowest slot index. Empty optional when nothing qualifies.
  std::optional<Hit> lookup(std::span<const double> input, double threshold) const {
    std::optional<Hit> best;
    for (int slot = 0; slot < occupancy_; ++slot) {
      double d = euclid_dist(entry_input(slot), input);
      if (d <= threshold && (!best || d < best->distance)) best = Hit{slot, d};
    }
    return best;
  }

  /// Distance from `input` to its nearest stored entry; +inf when empty.
  double min_distance(std::span<const double> input) const {
    double best = std::numeric_limits<double>::infinity();
    for (int slot = 0; slot < occupancy_; ++slot)
      best = std::min(best, euclid_dist(entry_input(slot), input));
    return best;
  }

  /// Slot of the nearest stored entry (any distance); -1 when empty.
  int nearest_slot(std::span<const double> input) const {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int slot = 0; slot < occupancy_; ++slot) {
      double d = euclid_dist(entry_input(slot), input);
      if (d < best_d) {
        best_d = d;
        best = slot;
      }
    }
    return best;
  }

  void insert(std::span<const double> input, std::span<const double> output) {
    if (static_cast<int>(input.size()) != input_dims_ ||
        static_cast<int>(output.size()) != output_dims_)
      throw ConfigError("MemoTable insert dimension mismatch");
    int slot = rr_cursor_;
    for (int d = 0; d < input_dims_; ++d)
      inputs_[static_cast<std::size_t>(slot) * input_dims_ + d] = input[d];
    for (int d = 0; d < output_dims_; ++d)
      outputs_[static_cast<std::size_t>(slot) * output_dims_ + d] = output[d];
    rr_cursor_ = (rr_cursor_ + 1) % capacity_;
    occupancy_ = std::min(occupancy_ + 1, capacity_);
  }

 private:
  int capacity_;
  int input_dims_;
  int output_dims_;
  int rr_cursor_ = 0;
  int occupancy_ = 0;
  std::vector<double> inputs_;
  std::vector<double> outputs_;
};

/// Arena footprint of one warp's table group: the entry storage plus one
/// cursor pair per table.
inline std::size_t table_group_bytes(int tables_per_warp, int table_size, int input_dims,
                                     int output_dims) {
  return static_cast<std::size_t>(tables_per_warp) * table_size *
             (input_dims + output_dims) * sizeof(double) +
         static_cast<std::size_t>(tables_per_warp) * 2 * sizeof(std::uint32_t);
}

/// Table owned by a lane under contiguous sub-warp sharing: blocks of
/// warp_size/tables_per_warp adjacent lanes share one table.
inline int lane_table_index(int lane, int warp_size, int tables_per_warp) {
  return lane / (warp_size / tables_per_warp);
}

/// Writer selection: among this invocation's miss lanes mapped to one
/// table, pick the lane whose input is farthest from its nearest table
/// entry (max-min distance, favoring cache diversity). An empty table puts
/// every candidate at +inf. Ties break to the lowest lane id.
inline int select_writer(std::span<const int> miss_lanes,
                         const std::function<std::span<const double>(int)>& input_of,
                         const MemoTable& table) {
  if (miss_lanes.empty()) throw ConfigError("select_writer with no miss lanes");
  int best_lane = -1;
  double best_d = -1.0;
  for (int lane : miss_lanes) {
    double d = table.min_distance(input_of(lane));
    if (best_lane < 0 || d > best_d || (d == best_d && lane < best_lane)) {
      best_lane = lane;
      best_d = d;
    }
  }
  return best_lane;
}

/// Per-lane outcome of one two-phase table access.
struct WarpMemoResult {
  std::vector<bool> participated;            // lane took part in this invocation
  std::vector<bool> hit;                     // read phase found a cached entry
  std::vector<bool> took_approx_path;        // returned a cached value
  std::vector<std::vector<double>> outputs;  // per-lane region outputs
  std::vector<int> scanned;                  // entries compared during lookup
  struct Write {
    int table;
    int lane;
  };
  std::vector<Write> writes;  // at most one per table
};

/// Thread-level two-phase warp memoization: every active lane looks its
/// input up in its table (read phase); a warp barrier separates phases;
/// miss lanes evaluate; then per table exactly one writer among the miss
/// lanes inserts at the round-robin slot. Hit lanes never insert.
inline WarpMemoResult warp_memo_phase(
    const WarpContext& warp, const IactConfig& cfg, std::span<MemoTable> tables,
    const std::function<std::span<const double>(int)>& input_of,
    const std::function<std::vector<double>(int)>& evaluate) {
  int tpw = static_cast<int>(tables.size());
  if (warp.lane_count % tpw != 0)
    throw ConfigError("table count must divide warp lane count");

  WarpMemoResult r;
  r.participated.assign(warp.lane_count, false);
  r.hit.assign(warp.lane_count, false);
  r.took_approx_path.assign(warp.lane_count, false);
  r.outputs.resize(warp.lane_count);
  r.scanned.assign(warp.lane_count, 0);

  // Read phase: lookups against the tables as left by previous invocations.
  for (int lane = 0; lane < warp.lane_count; ++lane) {
    if (!warp.lane_active(lane)) continue;
    r.participated[lane] = true;
    MemoTable& table = tables[lane_table_index(lane, warp.lane_count, tpw)];
    r.scanned[lane] = table.occupancy();
    auto hit = table.lookup(input_of(lane), cfg.threshold);
    if (hit) {
      r.hit[lane] = true;
      r.took_approx_path[lane] = true;
      auto out = table.entry_output(hit->slot);
      r.outputs[lane].assign(out.begin(), out.end());
    }
  }

  // Warp barrier. Miss lanes run the accurate region.
  for (int lane = 0; lane < warp.lane_count; ++lane)
    if (r.participated[lane] && !r.hit[lane]) r.outputs[lane] = evaluate(lane);

  // Write phase: one writer per table among its miss lanes.
  for (int t = 0; t < tpw; ++t) {
    std::vector<int> miss;
    for (int lane = 0; lane < warp.lane_count; ++lane)
      if (r.participated[lane] && !r.hit[lane] &&
          lane_table_index(lane, warp.lane_count, tpw) == t)
        miss.push_back(lane);
    if (miss.empty()) continue;
    int writer = select_writer(miss, input_of, tables[t]);
    tables[t].insert(input_of(writer), r.outputs[writer]);
    r.writes.push_back({t, writer});
  }
  return r;
}

}  // namespace simtac
