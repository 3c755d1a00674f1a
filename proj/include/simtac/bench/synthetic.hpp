#pragma once

#include <cstdint>
#include <vector>

#include "simtac/engine.hpp"

namespace simtac::bench {

/// Temporal-locality profiles for the controlled fixture kernel:
/// CONSTANT emits one value, SLOW_DRIFT a low-RSD ramp, NOISE seeded
/// high-RSD values with no two equal outputs.
enum class SyntheticProfile { kConstant, kSlowDrift, kNoise };

inline const char* synthetic_profile_name(SyntheticProfile p) {
  switch (p) {
    case SyntheticProfile::kConstant: return "constant";
    case SyntheticProfile::kSlowDrift: return "slow_drift";
    case SyntheticProfile::kNoise: return "noise";
  }
  return "?";
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Region input value for work item i. Doubles as the iACT lookup key.
inline double synthetic_value(SyntheticProfile profile, long long i, std::uint64_t seed) {
  switch (profile) {
    case SyntheticProfile::kConstant:
      return 7.5;
    case SyntheticProfile::kSlowDrift:
      return 50.0 * (1.0 + 1e-5 * static_cast<double>(i));
    case SyntheticProfile::kNoise: {
      std::uint64_t h = detail::splitmix64(seed ^ static_cast<std::uint64_t>(i));
      // Uniform in [1, 2): mean ~1.5, relative deviation ~0.19.
      return 1.0 + static_cast<double>(h >> 11) * 0x1.0p-53;
    }
  }
  return 0.0;
}

/// The fixture's accurate computation; linear so stale predictions show up
/// as proportional QoI error.
inline double synthetic_eval(double x) { return 3.0 * x + 1.0; }

/// Region over outputs[0..n): out[i] = synthetic_eval(value(i)).
inline Region synthetic_region(SyntheticProfile profile, std::uint64_t seed,
                               std::vector<double>& outputs) {
  Region r;
  r.input_dims = 1;
  r.output_dims = 1;
  r.load_input = [profile, seed](const LaneCtx& ctx, std::span<double> in) {
    in[0] = synthetic_value(profile, ctx.index, seed);
  };
  r.evaluate = [profile, seed](LaneCtx& ctx, std::span<const double>, std::span<double> out) {
    out[0] = synthetic_eval(synthetic_value(profile, ctx.index, seed));
  };
  r.store = [&outputs](const LaneCtx& ctx, std::span<const double> out) {
    outputs[ctx.index] = out[0];
  };
  return r;
}

/// Accurate outputs without the simulator, for QoI baselines.
inline std::vector<double> synthetic_reference(SyntheticProfile profile, std::uint64_t seed,
                                               long long n) {
  std::vector<double> out(n);
  for (long long i = 0; i < n; ++i)
    out[i] = synthetic_eval(synthetic_value(profile, i, seed));
  return out;
}

}  // namespace simtac::bench
