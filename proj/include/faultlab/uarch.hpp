#pragma once

#include "faultlab/events.hpp"
#include "faultlab/isa.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace faultlab {

enum class AccessKind : std::uint8_t { Read, Write };

/// Direct-mapped, write-allocate L1 data cache. Only tags are modelled; data
/// always lives in main memory.
class DataCache {
 public:
  static constexpr std::uint32_t kLineBytes = 16;
  static constexpr std::uint32_t kNumLines = 256;

  static constexpr std::uint32_t index_of(Address addr) { return (addr / kLineBytes) % kNumLines; }
  static constexpr std::uint32_t tag_of(Address addr) { return addr / (kLineBytes * kNumLines); }

  /// Looks the line up, installs it on a miss, and adds MEM_READ/MEM_WRITE
  /// plus L1D_HIT/L1D_MISS to `delta`. Returns true on a hit.
  bool access(Address addr, AccessKind kind, EventCounts& delta);

  void reset();

 private:
  struct Line {
    std::uint32_t tag = 0;
    bool valid = false;
  };
  std::array<Line, kNumLines> lines_{};
};

struct BranchResolution {
  bool predicted = false;
  bool mispredicted = false;
};

/// 64-entry table of 2-bit saturating counters indexed by (pc / 4) mod 64.
class BranchPredictor {
 public:
  static constexpr std::size_t kEntries = 64;
  static constexpr std::uint8_t kWeaklyNotTaken = 0b01;

  BranchPredictor() { reset(); }

  /// Predicts from the current counter, then trains it toward `taken`.
  /// Adds BR_EXEC, BR_TAKEN and BR_MISPRED to `delta`.
  BranchResolution predict_and_resolve(Address pc, bool taken, EventCounts& delta);

  std::uint8_t counter(Address pc) const { return table_[slot(pc)]; }
  void reset() { table_.fill(kWeaklyNotTaken); }

 private:
  static constexpr std::size_t slot(Address pc) { return (pc / 4) % kEntries; }
  std::array<std::uint8_t, kEntries> table_{};
};

/// Cost model: 1 base cycle, +1 on a D-cache hit, +10 on a miss, +2 on a
/// branch misprediction.
struct CostModel {
  static constexpr std::uint64_t kBase = 1;
  static constexpr std::uint64_t kCacheHit = 1;
  static constexpr std::uint64_t kCacheMiss = 10;
  static constexpr std::uint64_t kMispredict = 2;

  static constexpr std::uint64_t instruction_cost(std::optional<bool> dcache_hit,
                                                  std::optional<BranchResolution> branch) {
    std::uint64_t c = kBase;
    if (dcache_hit) c += *dcache_hit ? kCacheHit : kCacheMiss;
    if (branch && branch->mispredicted) c += kMispredict;
    return c;
  }
};

inline constexpr unsigned kDefaultHpcSlots = 6;

/// A bank of H hardware performance counters. Slots are configured while the
/// bank is disabled; counts only move while it is enabled.
class PmuBank {
 public:
  explicit PmuBank(unsigned slots = kDefaultHpcSlots) : slots_(slots) {}

  unsigned size() const { return static_cast<unsigned>(slots_.size()); }
  bool enabled() const { return enabled_; }

  /// Throws SlotOutOfRange or BankEnabled. Resets the slot's count.
  void configure(unsigned slot, EventKind event);
  /// Non-destructive. Throws SlotOutOfRange or SlotUnconfigured.
  std::uint64_t read(unsigned slot) const;
  std::optional<EventKind> selected(unsigned slot) const;

  void enable() { enabled_ = true; }
  void disable() { enabled_ = false; }
  /// Clears selections and counts, and disables the bank.
  void reset();

  void accumulate(const EventCounts& delta) {
    if (!enabled_) return;
    for (auto& s : slots_)
      if (s.selected) s.count += delta[event_index(*s.selected)];
  }

 private:
  struct Slot {
    std::optional<EventKind> selected;
    std::uint64_t count = 0;
  };
  std::vector<Slot> slots_;
  bool enabled_ = false;
};

}  // namespace faultlab
