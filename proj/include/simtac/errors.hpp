#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace simtac {

/// Base class for all simulator errors.
class SimtError : public std::runtime_error {
 public:
  explicit SimtError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid grid, cost model, or technique configuration.
class ConfigError : public SimtError {
 public:
  explicit ConfigError(const std::string& what) : SimtError(what) {}
};

/// Shared-memory budget exceeded at launch. Carries the exact shortfall.
class ArenaOverflowError : public SimtError {
 public:
  ArenaOverflowError(std::size_t required, std::size_t available)
      : SimtError("shared arena overflow: required " + std::to_string(required) +
                  " bytes, available " + std::to_string(available) + " bytes"),
        required_bytes(required),
        available_bytes(available) {}

  std::size_t required_bytes;
  std::size_t available_bytes;
};

/// Access to an arena offset with no covering allocation.
class ArenaFaultError : public SimtError {
 public:
  explicit ArenaFaultError(std::size_t offset)
      : SimtError("arena fault: no allocation covers offset " + std::to_string(offset)),
        offset(offset) {}

  std::size_t offset;
};

/// A team barrier was not reached by every active thread of the team in the
/// same lockstep phase. On real hardware this deadlocks; the simulator
/// aborts the launch deterministically instead and reports who went missing.
class BarrierDivergenceError : public SimtError {
 public:
  BarrierDivergenceError(int team, long long step, std::vector<int> missing)
      : SimtError("barrier divergence in team " + std::to_string(team) + " at step " +
                  std::to_string(step) + ": " + std::to_string(missing.size()) +
                  " thread(s) never arrived"),
        team_id(team),
        step(step),
        missing_threads(std::move(missing)) {}

  int team_id;
  long long step;
  std::vector<int> missing_threads;  // global thread ids
};

}  // namespace simtac
