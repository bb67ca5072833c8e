#pragma once

#include "faultlab/machine.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace faultlab {

/// Size of the region below the top of memory that memory faults may target
/// in addition to the image footprint.
inline constexpr std::uint32_t kStackRegionBytes = 4096;

MemoryRange stack_region(std::size_t mem_size);

enum class LocationClass : std::uint8_t { Register, ProgramCounter, Memory };

std::string_view location_name(LocationClass loc);  // "registers", "pc", "memory"
std::optional<LocationClass> location_from_name(std::string_view name);

struct FaultTarget {
  LocationClass location = LocationClass::Register;
  unsigned reg = 0;      // Register only
  Address address = 0;   // Memory only: aligned word address
  std::vector<std::uint8_t> bits;  // distinct, each < 32; one entry for an SBU

  static FaultTarget reg_bits(unsigned reg, std::vector<std::uint8_t> bits) {
    return {LocationClass::Register, reg, 0, std::move(bits)};
  }
  static FaultTarget pc_bits(std::vector<std::uint8_t> bits) {
    return {LocationClass::ProgramCounter, 0, 0, std::move(bits)};
  }
  static FaultTarget mem_bits(Address addr, std::vector<std::uint8_t> bits) {
    return {LocationClass::Memory, 0, addr, std::move(bits)};
  }

  Word mask() const {
    Word m = 0;
    for (auto b : bits) m |= Word{1} << b;
    return m;
  }
  bool operator==(const FaultTarget&) const = default;
};

/// One injection: where to flip and the code address whose first arrival
/// triggers it.
struct Fault {
  std::uint32_t id = 0;
  FaultTarget target;
  Address trigger = 0;
  std::string benchmark;

  bool operator==(const Fault&) const = default;
};

struct FlipResult {
  Word old_value = 0;
  Word new_value = 0;
};

/// Halt-mode debug access to one machine: breakpoints, run control, register
/// and memory access, and the bit-flip primitive. None of the access
/// operations advance the cycle counter or touch the cache, predictor or PMU.
///
/// State access is legal whenever the machine is not executing, i.e. before
/// the first resume, at a breakpoint, or after it halted, trapped or ran out
/// of budget. Calls made while `resume` is executing (from an observer) throw
/// NotHalted.
class DebugSession {
 public:
  explicit DebugSession(Machine machine) : machine_(std::move(machine)) {}

  const Machine& machine() const { return machine_; }
  Machine& machine() { return machine_; }

  /// Throws BadAddress unless `addr` is an aligned code address. Idempotent.
  void set_breakpoint(Address addr);
  void remove_breakpoint(Address addr);
  const std::vector<Address>& breakpoints() const { return breakpoints_; }

  Word read_register(unsigned idx) const;
  void write_register(unsigned idx, Word value);
  Word read_pc() const;
  void write_pc(Word value);

  std::vector<std::uint8_t> read_memory(Address addr, std::size_t len) const;
  void write_memory(Address addr, std::span<const std::uint8_t> bytes);

  /// XORs the target word with the target's bit mask. PC flips land on the
  /// raw held pc; the low two bits are discarded later, at fetch.
  FlipResult flip_bits(const FaultTarget& target);

  /// Throws BadTarget for a malformed target.
  void validate(const FaultTarget& target) const;

  /// Runs until the next stop. When the previous stop was a breakpoint at the
  /// current pc that is still set, that instruction is stepped over first.
  StopReason resume(std::uint64_t cycle_budget = kUnlimitedBudget, EventObserver* observer = nullptr);

  std::optional<StopReason> last_stop() const { return last_stop_; }

 private:
  void require_halted() const;

  Machine machine_;
  std::vector<Address> breakpoints_;
  std::optional<StopReason> last_stop_;
  bool running_ = false;
};

}  // namespace faultlab
