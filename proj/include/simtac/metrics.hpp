#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "simtac/errors.hpp"

namespace simtac {

/// Mean absolute percent error between accurate and approximate outputs,
/// as a fraction (multiply by 100 for display). Zero-denominator policy:
/// a term with acc=0 and app=0 contributes 0; acc=0 with app!=0 makes the
/// result infinite — the metric is undefined there and substituting a
/// finite value would fabricate accuracy.
inline double mape(std::span<const double> accurate, std::span<const double> approximate) {
  if (accurate.size() != approximate.size())
    throw ConfigError("mape length mismatch: " + std::to_string(accurate.size()) + " vs " +
                      std::to_string(approximate.size()));
  if (accurate.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < accurate.size(); ++i) {
    double a = accurate[i];
    double b = approximate[i];
    if (a == 0.0) {
      if (b == 0.0) continue;
      return std::numeric_limits<double>::infinity();
    }
    sum += std::abs(a - b) / std::abs(a);
  }
  return sum / static_cast<double>(accurate.size());
}

/// Misclassification rate: fraction of label positions that differ.
inline double mcr(std::span<const int> accurate, std::span<const int> approximate) {
  if (accurate.size() != approximate.size())
    throw ConfigError("mcr length mismatch: " + std::to_string(accurate.size()) + " vs " +
                      std::to_string(approximate.size()));
  if (accurate.empty()) return 0.0;
  std::size_t misses = 0;
  for (std::size_t i = 0; i < accurate.size(); ++i)
    if (accurate[i] != approximate[i]) ++misses;
  return static_cast<double>(misses) / static_cast<double>(accurate.size());
}

/// Percent of device memory consumed by per-thread memoization tables.
inline double footprint_per_thread_tables(double num_threads, double entries,
                                          double entry_bytes, double device_bytes) {
  if (num_threads < 0 || entries < 0 || entry_bytes < 0)
    throw ConfigError("footprint arguments must be non-negative");
  if (device_bytes <= 0) throw ConfigError("device size must be positive");
  return 100.0 * num_threads * entries * entry_bytes / device_bytes;
}

/// Iteration-count speedup of an early-converging approximate run.
inline double convergence_speedup(long long n_baseline_iters, long long n_approx_iters) {
  if (n_baseline_iters < 1 || n_approx_iters < 1)
    throw ConfigError("iteration counts must be >= 1");
  return static_cast<double>(n_baseline_iters) / static_cast<double>(n_approx_iters);
}

}  // namespace simtac
