#pragma once

#include <cstddef>
#include <cstring>
#include <string>
#include <vector>

#include "simtac/errors.hpp"

namespace simtac {

/// Handle to a double-sized cell inside a shared arena.
struct ArenaCell {
  std::size_t offset = 0;
};

/// Per-team shared memory, budgeted at launch. Allocation beyond the
/// capacity is a hard error carrying required vs available bytes; there is
/// no silent truncation. Offsets are handed out bump-style and recorded as
/// (offset, length, tag) so launch-time accounting is inspectable.
class SharedArena {
 public:
  struct Allocation {
    std::size_t offset;
    std::size_t length;
    std::string tag;
  };

  explicit SharedArena(std::size_t capacity_bytes)
      : capacity_(capacity_bytes), memory_(capacity_bytes, std::byte{0}) {}

  std::size_t capacity_bytes() const { return capacity_; }
  std::size_t used_bytes() const { return next_; }
  const std::vector<Allocation>& allocations() const { return allocations_; }

  std::size_t alloc_bytes(std::size_t length, std::string tag) {
    if (next_ + length > capacity_)
      throw ArenaOverflowError(next_ + length, capacity_);
    std::size_t offset = next_;
    next_ += length;
    allocations_.push_back({offset, length, std::move(tag)});
    return offset;
  }

  ArenaCell alloc_cell(std::string tag) {
    return ArenaCell{alloc_bytes(sizeof(double), std::move(tag))};
  }

  double read_cell(ArenaCell cell) const {
    check_allocated(cell.offset, sizeof(double));
    double v;
    std::memcpy(&v, memory_.data() + cell.offset, sizeof(double));
    return v;
  }

  void write_cell(ArenaCell cell, double v) {
    check_allocated(cell.offset, sizeof(double));
    std::memcpy(memory_.data() + cell.offset, &v, sizeof(double));
  }

 private:
  friend double atomic_add_shared(SharedArena&, ArenaCell, double);

  void check_allocated(std::size_t offset, std::size_t length) const {
    for (const Allocation& a : allocations_)
      if (offset >= a.offset && offset + length <= a.offset + a.length) return;
    throw ArenaFaultError(offset);
  }

  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<std::byte> memory_;
  std::vector<Allocation> allocations_;
};

/// Serialized atomic add on an arena cell; returns the previous value.
/// Simulated parallelism is single-threaded, so atomicity reduces to a
/// read-modify-write whose final total is order-independent.
inline double atomic_add_shared(SharedArena& arena, ArenaCell cell, double value) {
  double previous = arena.read_cell(cell);
  arena.write_cell(cell, previous + value);
  return previous;
}

}  // namespace simtac
