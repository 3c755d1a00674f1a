#pragma once

#include <cmath>
#include <deque>
#include <span>
#include <vector>

#include "simtac/taf.hpp"

namespace simtac {

/// After a completed prediction regime, either clear the window and refill
/// from scratch (product behavior) or keep sliding the old window.
enum class TafRefillPolicy { kClear, kSlide };

struct TafTracePoint {
  double output;
  bool took_approx_path;
  bool operator==(const TafTracePoint&) const = default;
};

/// Straight-line replay of the TAF state machine over a precomputed
/// accurate output stream, for differential testing. Written without the
/// incremental state machine: explicit fill/check/predict phases over a
/// deque, with a two-pass RSD. Stream values are consumed only by accurate
/// invocations; the trace ends after `invocations` points or when an
/// accurate invocation would run past the end of the stream.
inline std::vector<TafTracePoint> taf_reference_oracle(
    std::span<const double> stream, const TafConfig& cfg, long long invocations,
    TafRefillPolicy policy = TafRefillPolicy::kClear) {
  cfg.validate();
  std::vector<TafTracePoint> trace;
  std::deque<double> win;
  std::size_t pos = 0;
  double last = 0.0;

  while (static_cast<long long>(trace.size()) < invocations) {
    if (pos >= stream.size()) break;
    double v = stream[pos++];
    win.push_back(v);
    if (static_cast<int>(win.size()) > cfg.h_size) win.pop_front();
    last = v;
    trace.push_back({v, false});

    if (static_cast<int>(win.size()) == cfg.h_size) {
      double mean = 0.0;
      for (double x : win) mean += x;
      mean /= static_cast<double>(win.size());
      double ssd = 0.0;
      for (double x : win) ssd += (x - mean) * (x - mean);
      double sigma = std::sqrt(ssd / static_cast<double>(win.size()));
      double reldev;
      if (mean == 0.0)
        reldev = sigma == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      else
        reldev = sigma / std::abs(mean);

      if (reldev <= cfg.threshold) {
        int predicted = 0;
        while (predicted < cfg.p_size &&
               static_cast<long long>(trace.size()) < invocations) {
          trace.push_back({last, true});
          ++predicted;
        }
        if (predicted == cfg.p_size && policy == TafRefillPolicy::kClear) win.clear();
      }
    }
  }
  return trace;
}

}  // namespace simtac
