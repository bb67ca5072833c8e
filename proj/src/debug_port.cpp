#include "faultlab/debug_port.hpp"

#include "faultlab/error.hpp"

#include <algorithm>
#include <cstdio>

namespace faultlab {

namespace {

std::string hex(Address addr) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", addr);
  return buf;
}

// Clears `running` on every exit path of resume().
struct RunningGuard {
  bool& flag;
  explicit RunningGuard(bool& f) : flag(f) { flag = true; }
  ~RunningGuard() { flag = false; }
};

}  // namespace

MemoryRange stack_region(std::size_t mem_size) {
  const auto len = static_cast<std::uint32_t>(std::min<std::size_t>(kStackRegionBytes, mem_size));
  return {static_cast<Address>(mem_size - len), len};
}

std::string_view location_name(LocationClass loc) {
  switch (loc) {
    case LocationClass::Register: return "registers";
    case LocationClass::ProgramCounter: return "pc";
    case LocationClass::Memory: return "memory";
  }
  return "unknown";
}

std::optional<LocationClass> location_from_name(std::string_view name) {
  if (name == "registers" || name == "register") return LocationClass::Register;
  if (name == "pc") return LocationClass::ProgramCounter;
  if (name == "memory") return LocationClass::Memory;
  return std::nullopt;
}

void DebugSession::require_halted() const {
  if (running_) throw Error(ErrorCode::NotHalted, "target is executing");
}

void DebugSession::set_breakpoint(Address addr) {
  if (!machine_.image().in_code(addr)) throw Error(ErrorCode::BadAddress, hex(addr) + " is not a code address");
  if (std::find(breakpoints_.begin(), breakpoints_.end(), addr) == breakpoints_.end())
    breakpoints_.push_back(addr);
}

void DebugSession::remove_breakpoint(Address addr) {
  if (!machine_.image().in_code(addr)) throw Error(ErrorCode::BadAddress, hex(addr) + " is not a code address");
  std::erase(breakpoints_, addr);
}

Word DebugSession::read_register(unsigned idx) const {
  require_halted();
  if (idx >= kNumRegisters) throw Error(ErrorCode::BadIndex, "register index " + std::to_string(idx));
  return machine_.state().regs[idx];
}

void DebugSession::write_register(unsigned idx, Word value) {
  require_halted();
  if (idx >= kNumRegisters) throw Error(ErrorCode::BadIndex, "register index " + std::to_string(idx));
  machine_.state().regs[idx] = value;
}

Word DebugSession::read_pc() const {
  require_halted();
  return machine_.state().pc;
}

void DebugSession::write_pc(Word value) {
  require_halted();
  machine_.state().pc = value;
}

std::vector<std::uint8_t> DebugSession::read_memory(Address addr, std::size_t len) const {
  require_halted();
  const auto& mem = machine_.state().mem;
  if (addr > mem.size() || len > mem.size() - addr)
    throw Error(ErrorCode::OutOfBounds, hex(addr) + "+" + std::to_string(len));
  return {mem.begin() + addr, mem.begin() + addr + static_cast<std::ptrdiff_t>(len)};
}

void DebugSession::write_memory(Address addr, std::span<const std::uint8_t> bytes) {
  require_halted();
  auto& mem = machine_.state().mem;
  if (addr > mem.size() || bytes.size() > mem.size() - addr)
    throw Error(ErrorCode::OutOfBounds, hex(addr) + "+" + std::to_string(bytes.size()));
  std::copy(bytes.begin(), bytes.end(), mem.begin() + addr);
}

void DebugSession::validate(const FaultTarget& target) const {
  if (target.bits.empty()) throw Error(ErrorCode::BadTarget, "empty bit set");
  for (std::size_t i = 0; i < target.bits.size(); ++i) {
    if (target.bits[i] >= 32) throw Error(ErrorCode::BadTarget, "bit index " + std::to_string(target.bits[i]));
    for (std::size_t j = 0; j < i; ++j)
      if (target.bits[i] == target.bits[j]) throw Error(ErrorCode::BadTarget, "duplicate bit index");
  }
  switch (target.location) {
    case LocationClass::Register:
      if (target.reg >= kNumRegisters) throw Error(ErrorCode::BadTarget, "register index " + std::to_string(target.reg));
      break;
    case LocationClass::ProgramCounter: break;
    case LocationClass::Memory: {
      if (target.address & 3) throw Error(ErrorCode::BadTarget, hex(target.address) + " is not word aligned");
      const auto& image = machine_.image();
      const bool in_footprint = std::any_of(image.footprint.begin(), image.footprint.end(),
                                            [&](const MemoryRange& r) { return r.contains(target.address); });
      if (!in_footprint && !stack_region(machine_.state().mem.size()).contains(target.address))
        throw Error(ErrorCode::BadTarget, hex(target.address) + " is outside the image footprint and stack");
      break;
    }
  }
}

FlipResult DebugSession::flip_bits(const FaultTarget& target) {
  require_halted();
  validate(target);
  const Word mask = target.mask();
  auto& s = machine_.state();
  FlipResult r;
  switch (target.location) {
    case LocationClass::Register:
      r.old_value = s.regs[target.reg];
      s.regs[target.reg] ^= mask;
      r.new_value = s.regs[target.reg];
      break;
    case LocationClass::ProgramCounter:
      r.old_value = s.pc;
      s.pc ^= mask;
      r.new_value = s.pc;
      break;
    case LocationClass::Memory: {
      auto* p = &s.mem[target.address];
      r.old_value = Word{p[0]} | (Word{p[1]} << 8) | (Word{p[2]} << 16) | (Word{p[3]} << 24);
      r.new_value = r.old_value ^ mask;
      for (int b = 0; b < 4; ++b) p[b] = static_cast<std::uint8_t>(r.new_value >> (8 * b));
      break;
    }
  }
  return r;
}

StopReason DebugSession::resume(std::uint64_t cycle_budget, EventObserver* observer) {
  require_halted();
  RunningGuard guard(running_);
  auto& s = machine_.state();
  const Address pc = s.reported_pc();
  const bool at_set_breakpoint = last_stop_ && last_stop_->kind == StopReason::Kind::Breakpoint &&
                                 last_stop_->address == pc &&
                                 std::find(breakpoints_.begin(), breakpoints_.end(), pc) != breakpoints_.end();
  if (at_set_breakpoint && s.status == Status::Running && s.cycle < cycle_budget) {
    if (auto stop = machine_.step(observer)) {
      last_stop_ = *stop;
      return *stop;
    }
  }
  last_stop_ = machine_.run_until(breakpoints_, cycle_budget, observer);
  return *last_stop_;
}

}  // namespace faultlab
