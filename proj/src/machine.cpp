#include "faultlab/machine.hpp"

#include "faultlab/error.hpp"

#include <algorithm>
#include <cstdio>

namespace faultlab {

std::string_view trap_name(TrapKind kind) {
  switch (kind) {
    case TrapKind::IllegalOpcode: return "IllegalOpcode";
    case TrapKind::FetchOutOfBounds: return "FetchOutOfBounds";
    case TrapKind::MemOutOfBounds: return "MemOutOfBounds";
    case TrapKind::MisalignedAccess: return "MisalignedAccess";
  }
  return "Unknown";
}

std::string to_string(const StopReason& stop) {
  switch (stop.kind) {
    case StopReason::Kind::Breakpoint: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "breakpoint@0x%08X", stop.address);
      return buf;
    }
    case StopReason::Kind::Halted: return "halted";
    case StopReason::Kind::Trapped: return "trap:" + std::string(trap_name(stop.trap));
    case StopReason::Kind::BudgetExceeded: return "budget";
  }
  return "unknown";
}

Machine::Machine(const ProgramImage& image, std::size_t mem_size, unsigned hpc_slots)
    : image_(image), pmu_(hpc_slots) {
  if (mem_size < 4 || mem_size % 4 != 0 || mem_size > 0xFFFF'FFFCull)
    throw Error(ErrorCode::ImageTooLarge, "memory size must be a multiple of 4 below 4 GiB");
  for (const auto& r : image.footprint) {
    if (static_cast<std::uint64_t>(r.start) + r.length > mem_size)
      throw Error(ErrorCode::ImageTooLarge,
                  "image range ends at " + std::to_string(static_cast<std::uint64_t>(r.start) + r.length) +
                      " beyond memory of " + std::to_string(mem_size) + " bytes");
  }
  state_.mem.assign(mem_size, 0);
  for (std::size_t i = 0; i < image.code.size(); ++i) {
    const Word w = image.code[i];
    const std::size_t at = image.code_base + i * 4;
    for (int b = 0; b < 4; ++b) state_.mem[at + b] = static_cast<std::uint8_t>(w >> (8 * b));
  }
  std::copy(image.data.begin(), image.data.end(), state_.mem.begin() + image.data_base);
  state_.regs[kStackPointer] = static_cast<Word>(mem_size);
  state_.pc = image.entry;
}

Machine load_program(const ProgramImage& image, std::size_t mem_size, unsigned hpc_slots) {
  return Machine(image, mem_size, hpc_slots);
}

std::span<const std::uint8_t> read_output(const Machine& machine) { return machine.output(); }

bool Machine::load_word(Address addr, Word& out, EventCounts& delta, std::optional<bool>& hit) {
  if (addr & 3) return false;
  hit = dcache_.access(addr, AccessKind::Read, delta);
  const auto* p = &state_.mem[addr];
  out = Word{p[0]} | (Word{p[1]} << 8) | (Word{p[2]} << 16) | (Word{p[3]} << 24);
  return true;
}

bool Machine::store_word(Address addr, Word value, EventCounts& delta, std::optional<bool>& hit) {
  if (addr & 3) return false;
  hit = dcache_.access(addr, AccessKind::Write, delta);
  auto* p = &state_.mem[addr];
  for (int b = 0; b < 4; ++b) p[b] = static_cast<std::uint8_t>(value >> (8 * b));
  return true;
}

StopReason Machine::trap(TrapKind kind, Address pc, EventCounts& delta, bool counting,
                         EventObserver* observer) {
  state_.status = Status::Trapped;
  state_.trap = kind;
  delta[event_index(EventKind::Traps)] += 1;
  if (counting) pmu_.accumulate(delta);
  if (observer) observer->on_instruction(pc, delta, counting);
  return StopReason::trapped(kind);
}

std::optional<StopReason> Machine::step(EventObserver* observer) {
  auto& s = state_;
  if (s.status == Status::Halted) return StopReason::halted();
  if (s.status == Status::Trapped) return StopReason::trapped(s.trap);

  const bool counting = pmu_.enabled();
  EventCounts delta{};
  const Address pc = s.pc & ~Address{3};
  const std::size_t mem_size = s.mem.size();

  if (pc > mem_size - 4) return trap(TrapKind::FetchOutOfBounds, pc, delta, counting, observer);
  const auto* f = &s.mem[pc];
  const Instruction in{Word{f[0]} | (Word{f[1]} << 8) | (Word{f[2]} << 16) | (Word{f[3]} << 24)};
  const auto info = opcode_info(in.opcode());
  if (!info) return trap(TrapKind::IllegalOpcode, pc, delta, counting, observer);

  auto& r = s.regs;
  Address next = pc + 4;
  std::optional<bool> dcache_hit;
  std::optional<BranchResolution> branch;
  enum class PmuAction { None, Enable, Disable } pmu_action = PmuAction::None;
  bool halt = false;

  auto in_bounds = [&](Address addr) { return addr <= mem_size - 4; };
  auto mem_trap = [&](Address addr) {
    return (addr & 3) ? TrapKind::MisalignedAccess : TrapKind::MemOutOfBounds;
  };
  auto alu = [&] { ++delta[event_index(EventKind::AluOps)]; };
  auto cond_branch = [&](bool taken) {
    branch = predictor_.predict_and_resolve(pc, taken, delta);
    if (taken) next = pc + 4 + static_cast<Address>(in.simm16() * 4);
  };

  switch (info->opcode) {
    case Opcode::Nop: break;
    case Opcode::Halt: halt = true; break;
    case Opcode::Movi: r[in.rd()] = in.imm16(); break;
    case Opcode::Mov: r[in.rd()] = r[in.rs1()]; break;
    case Opcode::Add: alu(); r[in.rd()] = r[in.rs1()] + r[in.rs2()]; break;
    case Opcode::Sub: alu(); r[in.rd()] = r[in.rs1()] - r[in.rs2()]; break;
    case Opcode::Mul: alu(); r[in.rd()] = r[in.rs1()] * r[in.rs2()]; break;
    case Opcode::And: alu(); r[in.rd()] = r[in.rs1()] & r[in.rs2()]; break;
    case Opcode::Or: alu(); r[in.rd()] = r[in.rs1()] | r[in.rs2()]; break;
    case Opcode::Xor: alu(); r[in.rd()] = r[in.rs1()] ^ r[in.rs2()]; break;
    case Opcode::Shl: alu(); r[in.rd()] = r[in.rs1()] << (in.imm12() & 31); break;
    case Opcode::Shr: alu(); r[in.rd()] = r[in.rs1()] >> (in.imm12() & 31); break;
    case Opcode::Addi: alu(); r[in.rd()] = r[in.rs1()] + static_cast<Word>(in.simm12()); break;
    case Opcode::Cmp:
      alu();
      s.flag_eq = r[in.rs1()] == r[in.rs2()];
      s.flag_lt = static_cast<std::int32_t>(r[in.rs1()]) < static_cast<std::int32_t>(r[in.rs2()]);
      break;
    case Opcode::Loadw: {
      const Address addr = r[in.rs1()] + static_cast<Word>(in.simm12());
      Word v = 0;
      if (!in_bounds(addr) || !load_word(addr, v, delta, dcache_hit))
        return trap(mem_trap(addr), pc, delta, counting, observer);
      r[in.rd()] = v;
      break;
    }
    case Opcode::Storew: {
      const Address addr = r[in.rs1()] + static_cast<Word>(in.simm12());
      if (!in_bounds(addr) || !store_word(addr, r[in.rs2()], delta, dcache_hit))
        return trap(mem_trap(addr), pc, delta, counting, observer);
      break;
    }
    case Opcode::Push: {
      const Address addr = r[kStackPointer] - 4;
      if (!in_bounds(addr) || !store_word(addr, r[in.rd()], delta, dcache_hit))
        return trap(mem_trap(addr), pc, delta, counting, observer);
      r[kStackPointer] = addr;
      break;
    }
    case Opcode::Pop: {
      const Address addr = r[kStackPointer];
      Word v = 0;
      if (!in_bounds(addr) || !load_word(addr, v, delta, dcache_hit))
        return trap(mem_trap(addr), pc, delta, counting, observer);
      r[kStackPointer] = addr + 4;
      r[in.rd()] = v;
      break;
    }
    case Opcode::Beq: cond_branch(s.flag_eq); break;
    case Opcode::Bne: cond_branch(!s.flag_eq); break;
    case Opcode::Blt: cond_branch(s.flag_lt); break;
    case Opcode::Bge: cond_branch(!s.flag_lt); break;
    case Opcode::Jmp:
      ++delta[event_index(EventKind::JumpExec)];
      next = pc + 4 + static_cast<Address>(in.simm16() * 4);
      break;
    case Opcode::Call:
      ++delta[event_index(EventKind::JumpExec)];
      r[kLinkRegister] = pc + 4;
      next = pc + 4 + static_cast<Address>(in.simm16() * 4);
      break;
    case Opcode::Ret:
      ++delta[event_index(EventKind::JumpExec)];
      next = r[kLinkRegister];
      break;
    case Opcode::Out: {
      const Word v = r[in.rs1()];
      for (int b = 0; b < 4; ++b) s.output.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
      break;
    }
    case Opcode::PmuOn: pmu_action = PmuAction::Enable; break;
    case Opcode::PmuOff: pmu_action = PmuAction::Disable; break;
  }

  const std::uint64_t cost = CostModel::instruction_cost(dcache_hit, branch);
  s.cycle += cost;
  delta[event_index(EventKind::Cycles)] += cost;
  delta[event_index(EventKind::InstrRetired)] += 1;
  s.pc = next;

  // An instruction counts iff the window was open when it started, so PMUON
  // itself is excluded and PMUOFF included.
  if (counting) pmu_.accumulate(delta);
  if (pmu_action == PmuAction::Enable) pmu_.enable();
  if (pmu_action == PmuAction::Disable) pmu_.disable();
  if (observer) observer->on_instruction(pc, delta, counting);

  if (halt) {
    s.status = Status::Halted;
    return StopReason::halted();
  }
  return std::nullopt;
}

StopReason Machine::run_until(std::span<const Address> breakpoints, std::uint64_t cycle_budget,
                              EventObserver* observer) {
  while (true) {
    if (state_.status == Status::Halted) return StopReason::halted();
    if (state_.status == Status::Trapped) return StopReason::trapped(state_.trap);
    const Address pc = state_.reported_pc();
    if (std::find(breakpoints.begin(), breakpoints.end(), pc) != breakpoints.end())
      return StopReason::breakpoint(pc);
    if (state_.cycle >= cycle_budget) return StopReason::budget_exceeded();
    if (auto stop = step(observer)) return *stop;
  }
}

}  // namespace faultlab
