#pragma once

#include "faultlab/assembler.hpp"
#include "faultlab/events.hpp"
#include "faultlab/isa.hpp"
#include "faultlab/uarch.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace faultlab {

inline constexpr std::size_t kDefaultMemSize = 1u << 20;
inline constexpr std::uint64_t kUnlimitedBudget = std::numeric_limits<std::uint64_t>::max();

enum class Status : std::uint8_t { Running, Halted, Trapped };

enum class TrapKind : std::uint8_t { IllegalOpcode, FetchOutOfBounds, MemOutOfBounds, MisalignedAccess };

std::string_view trap_name(TrapKind kind);

struct StopReason {
  enum class Kind : std::uint8_t { Breakpoint, Halted, Trapped, BudgetExceeded };

  Kind kind = Kind::Halted;
  Address address = 0;  // Breakpoint only
  TrapKind trap = TrapKind::IllegalOpcode;  // Trapped only

  static StopReason breakpoint(Address addr) { return {Kind::Breakpoint, addr, {}}; }
  static StopReason halted() { return {Kind::Halted, 0, {}}; }
  static StopReason trapped(TrapKind t) { return {Kind::Trapped, 0, t}; }
  static StopReason budget_exceeded() { return {Kind::BudgetExceeded, 0, {}}; }

  bool operator==(const StopReason& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Breakpoint) return address == o.address;
    if (kind == Kind::Trapped) return trap == o.trap;
    return true;
  }
};

/// "breakpoint@0x0000004c", "halted", "trap:MemOutOfBounds", "budget".
std::string to_string(const StopReason& stop);

/// Receives every executed (or trapping) instruction's event delta. `counting`
/// is true when the PMU window was open for that instruction.
class EventObserver {
 public:
  virtual ~EventObserver() = default;
  virtual void on_instruction(Address pc, const EventCounts& delta, bool counting) = 0;
};

/// Unlimited-counter observer: counts every event at once, inside the PMU
/// window and over the whole run.
class FullEventCounter : public EventObserver {
 public:
  void on_instruction(Address, const EventCounts& delta, bool counting) override {
    for (std::size_t i = 0; i < kEventCount; ++i) {
      total_[i] += delta[i];
      if (counting) windowed_[i] += delta[i];
    }
    window_seen_ = window_seen_ || counting;
  }

  EventVector windowed() const { return EventVector::complete(windowed_); }
  EventVector total() const { return EventVector::complete(total_); }
  bool window_seen() const { return window_seen_; }

 private:
  EventCounts windowed_{};
  EventCounts total_{};
  bool window_seen_ = false;
};

struct MachineState {
  std::array<Word, kNumRegisters> regs{};
  Word pc = 0;  // raw; bits [1:0] are dropped at fetch
  std::vector<std::uint8_t> mem;
  std::uint64_t cycle = 0;
  std::vector<std::uint8_t> output;
  Status status = Status::Running;
  TrapKind trap = TrapKind::IllegalOpcode;
  bool flag_eq = false;
  bool flag_lt = false;

  Address reported_pc() const { return pc & ~Address{3}; }
};

/// The emulated target: architectural state plus the data cache, branch
/// predictor and PMU. Instances are independent; nothing is shared.
class Machine {
 public:
  /// Loads `image` into a fresh machine (the loader). Registers are zero except
  /// R14 = mem_size; pc = entry. Throws ImageTooLarge if the footprint does not
  /// fit in `mem_size`.
  explicit Machine(const ProgramImage& image, std::size_t mem_size = kDefaultMemSize,
                   unsigned hpc_slots = kDefaultHpcSlots);

  const MachineState& state() const { return state_; }
  MachineState& state() { return state_; }
  const ProgramImage& image() const { return image_; }

  PmuBank& pmu() { return pmu_; }
  const PmuBank& pmu() const { return pmu_; }
  const DataCache& dcache() const { return dcache_; }
  const BranchPredictor& predictor() const { return predictor_; }

  /// Executes one instruction. Returns a stop reason when the instruction
  /// halted or trapped the machine, nullopt while it keeps running.
  std::optional<StopReason> step(EventObserver* observer = nullptr);

  /// Steps until a breakpoint (checked before each fetch), HALT, a trap, or the
  /// cycle budget. A breakpoint at the current pc stops immediately.
  StopReason run_until(std::span<const Address> breakpoints, std::uint64_t cycle_budget,
                       EventObserver* observer = nullptr);

  std::span<const std::uint8_t> output() const { return state_.output; }

 private:
  bool load_word(Address addr, Word& out, EventCounts& delta, std::optional<bool>& hit);
  bool store_word(Address addr, Word value, EventCounts& delta, std::optional<bool>& hit);
  StopReason trap(TrapKind kind, Address pc, EventCounts& delta, bool counting, EventObserver* observer);

  ProgramImage image_;
  MachineState state_;
  DataCache dcache_;
  BranchPredictor predictor_;
  PmuBank pmu_;
};

/// Free-function form of the loader.
Machine load_program(const ProgramImage& image, std::size_t mem_size = kDefaultMemSize,
                     unsigned hpc_slots = kDefaultHpcSlots);

std::span<const std::uint8_t> read_output(const Machine& machine);

}  // namespace faultlab
