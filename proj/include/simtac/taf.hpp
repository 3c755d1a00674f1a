#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "simtac/errors.hpp"

namespace simtac {

struct TafConfig {
  int h_size = 1;
  int p_size = 1;
  double threshold = 0.0;

  void validate() const {
    if (h_size < 1) throw ConfigError("TAF history size must be >= 1");
    if (p_size < 1) throw ConfigError("TAF prediction size must be >= 1");
    if (!(threshold >= 0.0)) throw ConfigError("TAF threshold must be >= 0");
  }
  bool operator==(const TafConfig&) const = default;
};

/// Relative standard deviation sigma/|mu| with population sigma. Zero-mean
/// windows: all-zero returns 0, otherwise infinity (no stable regime).
inline double rsd(std::span<const double> window) {
  if (window.empty()) throw ConfigError("rsd of empty window");
  double mean = 0.0;
  for (double v : window) mean += v;
  mean /= static_cast<double>(window.size());
  double ssd = 0.0;
  for (double v : window) ssd += (v - mean) * (v - mean);
  double sigma = std::sqrt(ssd / static_cast<double>(window.size()));
  if (mean == 0.0)
    return sigma == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return sigma / std::abs(mean);
}

enum class TafMode : std::uint8_t { kFilling, kChecking, kPredicting };

/// Arena footprint of one TAF state: the output window(s) plus a fixed
/// header (mode, prediction counter, ring cursor, fill count).
inline std::size_t taf_state_bytes(int h_size, int output_dims = 1) {
  return static_cast<std::size_t>(output_dims) * h_size * sizeof(double) + 16;
}

/// Per-thread TAF state machine. Tracks a sliding window of the last
/// h_size accurately computed outputs; once the window is full, every
/// accurate invocation checks the window's RSD and a pass enters a
/// prediction regime of exactly p_size invocations that replay the newest
/// output. After the regime the window is cleared and refills from fresh
/// accurate outputs, so predictions never feed their own activation.
///
/// Multi-output regions keep one window per output and activate only when
/// every output's RSD passes (conjunction).
class TafState {
 public:
  explicit TafState(const TafConfig& cfg, int output_dims = 1)
      : cfg_(cfg),
        dims_(output_dims),
        ring_(static_cast<std::size_t>(output_dims) * cfg.h_size, 0.0),
        last_(output_dims, 0.0) {
    cfg.validate();
    if (output_dims < 1) throw ConfigError("TAF output_dims must be >= 1");
  }

  const TafConfig& config() const { return cfg_; }
  int output_dims() const { return dims_; }
  TafMode mode() const { return mode_; }
  int remaining_predictions() const { return remaining_; }
  int window_count() const { return count_; }

  /// Activation criterion: the state machine is in its stable regime.
  bool predicting() const { return mode_ == TafMode::kPredicting; }

  double last_output(int dim = 0) const { return last_[dim]; }

  /// Window of one output, oldest to newest.
  std::vector<double> window(int dim = 0) const {
    std::vector<double> out;
    out.reserve(count_);
    for (int j = 0; j < count_; ++j)
      out.push_back(ring_at(dim, (head_ + j) % cfg_.h_size));
    return out;
  }

  /// Accurate-path update with freshly evaluated outputs. Appends (or
  /// slides) the window and, when the window is full, runs the RSD check
  /// that may start a prediction regime. A state forced onto the accurate
  /// path by a group vote while predicting still consumes one prediction.
  void observe_accurate(std::span<const double> outputs) {
    push(outputs);
    for (int d = 0; d < dims_; ++d) last_[d] = outputs[d];
    switch (mode_) {
      case TafMode::kFilling:
        if (count_ == cfg_.h_size) mode_ = check_passes() ? start_regime() : TafMode::kChecking;
        break;
      case TafMode::kChecking:
        if (check_passes()) mode_ = start_regime();
        break;
      case TafMode::kPredicting:
        tick_regime();
        break;
    }
  }

  /// Approximate-path emit: writes the memoized newest outputs. In the
  /// prediction regime this consumes one prediction; a state forced onto
  /// the approximate path by a group vote outside the regime is left
  /// untouched (no fabricated window entries).
  void emit_approx(std::span<double> outputs) {
    for (int d = 0; d < dims_; ++d) outputs[d] = last_[d];
    if (mode_ == TafMode::kPredicting) tick_regime();
  }

 private:
  double& ring_at(int dim, int slot) { return ring_[dim * cfg_.h_size + slot]; }
  double ring_at(int dim, int slot) const { return ring_[dim * cfg_.h_size + slot]; }

  void push(std::span<const double> outputs) {
    if (count_ < cfg_.h_size) {
      int slot = (head_ + count_) % cfg_.h_size;
      for (int d = 0; d < dims_; ++d) ring_at(d, slot) = outputs[d];
      ++count_;
    } else {
      for (int d = 0; d < dims_; ++d) ring_at(d, head_) = outputs[d];
      head_ = (head_ + 1) % cfg_.h_size;
    }
  }

  bool check_passes() const {
    for (int d = 0; d < dims_; ++d) {
      std::vector<double> w = window(d);
      if (!(rsd(w) <= cfg_.threshold)) return false;
    }
    return true;
  }

  TafMode start_regime() {
    remaining_ = cfg_.p_size;
    return TafMode::kPredicting;
  }

  void tick_regime() {
    if (--remaining_ == 0) {
      count_ = 0;
      head_ = 0;
      mode_ = TafMode::kFilling;
    }
  }

  TafConfig cfg_;
  int dims_;
  TafMode mode_ = TafMode::kFilling;
  int remaining_ = 0;
  int head_ = 0;
  int count_ = 0;
  std::vector<double> ring_;
  std::vector<double> last_;
};

struct TafStepResult {
  double output;
  bool took_approx_path;
};

/// One thread-level TAF invocation: predict from the stable regime, or run
/// the accurate region and feed the state machine.
inline TafStepResult taf_step(TafState& state, const std::function<double()>& evaluate) {
  if (state.predicting()) {
    double out;
    state.emit_approx({&out, 1});
    return {out, true};
  }
  double out = evaluate();
  state.observe_accurate({&out, 1});
  return {out, false};
}

}  // namespace simtac
