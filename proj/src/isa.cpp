#include "faultlab/isa.hpp"

#include <array>
#include <cstdio>

namespace faultlab {

namespace {

constexpr std::array<OpcodeInfo, 28> kOpcodes = {{
    {Opcode::Nop, "NOP", Format::None},
    {Opcode::Halt, "HALT", Format::None},
    {Opcode::Movi, "MOVI", Format::RdImm16},
    {Opcode::Mov, "MOV", Format::RdRs1},
    {Opcode::Add, "ADD", Format::RdRs1Rs2},
    {Opcode::Sub, "SUB", Format::RdRs1Rs2},
    {Opcode::Mul, "MUL", Format::RdRs1Rs2},
    {Opcode::And, "AND", Format::RdRs1Rs2},
    {Opcode::Or, "OR", Format::RdRs1Rs2},
    {Opcode::Xor, "XOR", Format::RdRs1Rs2},
    {Opcode::Shl, "SHL", Format::RdRs1Imm},
    {Opcode::Shr, "SHR", Format::RdRs1Imm},
    {Opcode::Addi, "ADDI", Format::RdRs1Imm},
    {Opcode::Loadw, "LOADW", Format::Load},
    {Opcode::Storew, "STOREW", Format::Store},
    {Opcode::Push, "PUSH", Format::Rd},
    {Opcode::Pop, "POP", Format::Rd},
    {Opcode::Cmp, "CMP", Format::Rs1Rs2},
    {Opcode::Beq, "BEQ", Format::Branch},
    {Opcode::Bne, "BNE", Format::Branch},
    {Opcode::Blt, "BLT", Format::Branch},
    {Opcode::Bge, "BGE", Format::Branch},
    {Opcode::Jmp, "JMP", Format::Branch},
    {Opcode::Call, "CALL", Format::Branch},
    {Opcode::Ret, "RET", Format::None},
    {Opcode::Out, "OUT", Format::Rs1},
    {Opcode::PmuOn, "PMUON", Format::None},
    {Opcode::PmuOff, "PMUOFF", Format::None},
}};

constexpr std::array<std::int8_t, 256> build_lookup() {
  std::array<std::int8_t, 256> table{};
  for (auto& e : table) e = -1;
  for (std::size_t i = 0; i < kOpcodes.size(); ++i)
    table[static_cast<std::uint8_t>(kOpcodes[i].opcode)] = static_cast<std::int8_t>(i);
  return table;
}

constexpr auto kLookup = build_lookup();

}  // namespace

std::optional<OpcodeInfo> opcode_info(std::uint8_t raw) {
  auto idx = kLookup[raw];
  if (idx < 0) return std::nullopt;
  return kOpcodes[static_cast<std::size_t>(idx)];
}

std::optional<OpcodeInfo> opcode_by_mnemonic(std::string_view mnemonic) {
  for (const auto& info : kOpcodes)
    if (info.mnemonic == mnemonic) return info;
  return std::nullopt;
}

std::string disassemble(Word raw, Address pc) {
  Instruction in{raw};
  auto info = opcode_info(in.opcode());
  char buf[96];
  if (!info) {
    std::snprintf(buf, sizeof buf, ".word 0x%08X", raw);
    return buf;
  }
  auto m = info->mnemonic.data();
  auto target = [&] { return pc + 4 + static_cast<std::uint32_t>(in.simm16() * 4); };
  switch (info->format) {
    case Format::None: std::snprintf(buf, sizeof buf, "%s", m); break;
    case Format::Rd: std::snprintf(buf, sizeof buf, "%s R%u", m, in.rd()); break;
    case Format::Rs1: std::snprintf(buf, sizeof buf, "%s R%u", m, in.rs1()); break;
    case Format::RdImm16:
      std::snprintf(buf, sizeof buf, "%s R%u, %u", m, in.rd(), in.imm16());
      break;
    case Format::RdRs1:
      std::snprintf(buf, sizeof buf, "%s R%u, R%u", m, in.rd(), in.rs1());
      break;
    case Format::RdRs1Rs2:
      std::snprintf(buf, sizeof buf, "%s R%u, R%u, R%u", m, in.rd(), in.rs1(), in.rs2());
      break;
    case Format::RdRs1Imm:
      if (info->opcode == Opcode::Addi)
        std::snprintf(buf, sizeof buf, "%s R%u, R%u, %d", m, in.rd(), in.rs1(), in.simm12());
      else
        std::snprintf(buf, sizeof buf, "%s R%u, R%u, %u", m, in.rd(), in.rs1(), in.imm12());
      break;
    case Format::Rs1Rs2:
      std::snprintf(buf, sizeof buf, "%s R%u, R%u", m, in.rs1(), in.rs2());
      break;
    case Format::Load:
      std::snprintf(buf, sizeof buf, "%s R%u, [R%u%+d]", m, in.rd(), in.rs1(), in.simm12());
      break;
    case Format::Store:
      std::snprintf(buf, sizeof buf, "%s R%u, [R%u%+d]", m, in.rs2(), in.rs1(), in.simm12());
      break;
    case Format::Branch:
      std::snprintf(buf, sizeof buf, "%s 0x%08X", m, target());
      break;
  }
  return buf;
}

}  // namespace faultlab
