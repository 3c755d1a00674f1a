#pragma once

#include <optional>
#include <string>
#include <utility>

#include "simtac/errors.hpp"

namespace simtac {

enum class PerfoKind { kSmall, kLarge, kIni, kFini, kHerdedSmall, kHerdedLarge };

inline bool perfo_kind_uses_modulus(PerfoKind k) {
  return k == PerfoKind::kSmall || k == PerfoKind::kLarge ||
         k == PerfoKind::kHerdedSmall || k == PerfoKind::kHerdedLarge;
}

inline bool perfo_kind_is_herded(PerfoKind k) {
  return k == PerfoKind::kHerdedSmall || k == PerfoKind::kHerdedLarge;
}

struct PerfoConfig {
  PerfoKind kind = PerfoKind::kSmall;
  int modulus = 0;      // SMALL / LARGE / HERDED_*
  int skip_percent = 0; // INI / FINI

  void validate() const {
    if (perfo_kind_uses_modulus(kind)) {
      if (modulus < 2) throw ConfigError("perforation modulus must be >= 2");
    } else {
      if (skip_percent < 1 || skip_percent > 99)
        throw ConfigError("perforation skip percent must be in [1, 99]");
    }
  }
  bool operator==(const PerfoConfig&) const = default;
};

/// Iterations dropped by INI/FINI for a loop of `trip_count` iterations.
inline long long perfo_skip_count(int percent, long long trip_count) {
  return (static_cast<long long>(percent) * trip_count) / 100;
}

/// Skip decision for one region encounter.
///   SMALL:m   executes the first m-1 encounters of each group of m and
///             skips the m-th (counter mod m == m-1), so the first
///             encounter always executes.
///   LARGE:m   executes one encounter of every m (counter mod m == 0).
///   INI:p     skips the first floor(p% of trip_count) iterations.
///   FINI:p    skips the last floor(p% of trip_count) iterations.
///   HERDED_*  same rules as SMALL/LARGE but the caller keys them on the
///             warp's shared lockstep counter, identical for all lanes.
inline bool should_skip(const PerfoConfig& cfg, long long counter_or_step,
                        std::optional<long long> trip_count = std::nullopt) {
  cfg.validate();
  switch (cfg.kind) {
    case PerfoKind::kSmall:
    case PerfoKind::kHerdedSmall:
      return counter_or_step % cfg.modulus == cfg.modulus - 1;
    case PerfoKind::kLarge:
    case PerfoKind::kHerdedLarge:
      return counter_or_step % cfg.modulus != 0;
    case PerfoKind::kIni: {
      if (!trip_count) throw ConfigError("INI perforation requires a trip count");
      return counter_or_step < perfo_skip_count(cfg.skip_percent, *trip_count);
    }
    case PerfoKind::kFini: {
      if (!trip_count) throw ConfigError("FINI perforation requires a trip count");
      return counter_or_step >= *trip_count - perfo_skip_count(cfg.skip_percent, *trip_count);
    }
  }
  throw ConfigError("unknown perforation kind");
}

/// Compile-style bound rewrite for INI/FINI: shifts the lower or upper
/// bound so the executed range is contiguous and matches should_skip.
/// An empty resulting range is legal (everything skipped).
inline std::pair<long long, long long> rewrite_bounds(const PerfoConfig& cfg,
                                                      long long lower, long long upper) {
  cfg.validate();
  if (lower >= upper) throw ConfigError("rewrite_bounds requires lower < upper");
  long long cut = perfo_skip_count(cfg.skip_percent, upper - lower);
  switch (cfg.kind) {
    case PerfoKind::kIni:
      return {lower + cut, upper};
    case PerfoKind::kFini:
      return {lower, upper - cut};
    default:
      throw ConfigError("rewrite_bounds applies only to INI/FINI perforation");
  }
}

inline std::string perfo_kind_name(PerfoKind k) {
  switch (k) {
    case PerfoKind::kSmall: return "small";
    case PerfoKind::kLarge: return "large";
    case PerfoKind::kIni: return "ini";
    case PerfoKind::kFini: return "fini";
    case PerfoKind::kHerdedSmall: return "herded_small";
    case PerfoKind::kHerdedLarge: return "herded_large";
  }
  return "?";
}

}  // namespace simtac
