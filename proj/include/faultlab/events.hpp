#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace faultlab {

// Stable ids: the numeric value is what manifests serialize.
enum class EventKind : std::uint8_t {
  Cycles = 0,
  InstrRetired = 1,
  MemRead = 2,
  MemWrite = 3,
  L1dHit = 4,
  L1dMiss = 5,
  BrExec = 6,
  BrTaken = 7,
  BrMispred = 8,
  JumpExec = 9,
  AluOps = 10,
  Traps = 11,
};

inline constexpr std::size_t kEventCount = 12;

inline constexpr std::array<EventKind, kEventCount> kEventCatalog = {
    EventKind::Cycles,   EventKind::InstrRetired, EventKind::MemRead,
    EventKind::MemWrite, EventKind::L1dHit,       EventKind::L1dMiss,
    EventKind::BrExec,   EventKind::BrTaken,      EventKind::BrMispred,
    EventKind::JumpExec, EventKind::AluOps,       EventKind::Traps,
};

constexpr std::size_t event_index(EventKind kind) {
  return static_cast<std::size_t>(kind);
}

std::string_view event_name(EventKind kind);
std::optional<EventKind> event_from_name(std::string_view name);

/// Per-instruction (or per-run) event counts over the whole catalog.
using EventCounts = std::array<std::uint64_t, kEventCount>;

/// A run's event map. `present` marks which catalog entries were actually
/// measured; a vector assembled from a subset of events leaves the rest absent.
struct EventVector {
  EventCounts counts{};
  std::bitset<kEventCount> present;

  static EventVector complete(const EventCounts& counts) {
    EventVector v;
    v.counts = counts;
    v.present.set();
    return v;
  }

  std::uint64_t operator[](EventKind kind) const {
    return counts[event_index(kind)];
  }
  bool has(EventKind kind) const { return present.test(event_index(kind)); }
  bool is_complete() const { return present.all(); }

  void set(EventKind kind, std::uint64_t value) {
    counts[event_index(kind)] = value;
    present.set(event_index(kind));
  }

  // Present entries compared; absent ones ignored only if absent on both sides.
  bool operator==(const EventVector& other) const;
};

/// Checks the structural identities a run's counts must satisfy:
///   L1D_HIT + L1D_MISS == MEM_READ + MEM_WRITE
///   BR_TAKEN <= BR_EXEC, BR_MISPRED <= BR_EXEC
///   INSTR_RETIRED <= CYCLES, TRAPS in {0, 1}
/// Identities whose events are not all present are skipped.
/// Returns the first violated identity, or nullopt.
std::optional<std::string_view> check_identities(const EventVector& v);

/// Parses a comma separated list of event names ("CYCLES,L1D_MISS").
std::vector<EventKind> parse_event_list(std::string_view csv);

}  // namespace faultlab
