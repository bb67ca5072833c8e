#pragma once

// Fixed-width 32-bit instruction encoding. See docs/ISA.md.
//
//   31      24 23  20 19  16 15  12 11          0
//  +----------+------+------+------+-------------+
//  |  opcode  |  rd  | rs1  | rs2  |    imm12    |   R / I12 forms
//  +----------+------+------+------+-------------+
//  |  opcode  |  rd  | rs1  |        imm16       |   I16 / branch forms
//  +----------+------+------+--------------------+

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace faultlab {

using Word = std::uint32_t;
using Address = std::uint32_t;

inline constexpr unsigned kNumRegisters = 16;
inline constexpr unsigned kStackPointer = 14;
inline constexpr unsigned kLinkRegister = 15;

enum class Opcode : std::uint8_t {
  // 0x00 is deliberately unassigned: zero-filled memory traps when fetched.
  Nop = 0x01,
  Halt = 0x02,
  Movi = 0x03,
  Mov = 0x04,
  Add = 0x08,
  Sub = 0x09,
  Mul = 0x0A,
  And = 0x0B,
  Or = 0x0C,
  Xor = 0x0D,
  Shl = 0x0E,
  Shr = 0x0F,
  Addi = 0x10,
  Loadw = 0x18,
  Storew = 0x19,
  Push = 0x1A,
  Pop = 0x1B,
  Cmp = 0x20,
  Beq = 0x28,
  Bne = 0x29,
  Blt = 0x2A,
  Bge = 0x2B,
  Jmp = 0x30,
  Call = 0x31,
  Ret = 0x32,
  Out = 0x38,
  PmuOn = 0x3C,
  PmuOff = 0x3D,
};

enum class Format : std::uint8_t {
  None,      // NOP, HALT, RET, PMUON, PMUOFF
  Rd,        // PUSH rd, POP rd
  Rs1,       // OUT rs1
  RdImm16,   // MOVI rd, imm16 (zero-extended)
  RdRs1,     // MOV rd, rs1
  RdRs1Rs2,  // ADD rd, rs1, rs2 ...
  RdRs1Imm,  // SHL/SHR rd, rs1, imm (0..31); ADDI rd, rs1, simm12
  Rs1Rs2,    // CMP rs1, rs2
  Load,      // LOADW rd, [rs1+simm12]
  Store,     // STOREW rs2, [rs1+simm12]
  Branch,    // BEQ/BNE/BLT/BGE/JMP/CALL label (simm16 word offset from pc+4)
};

struct OpcodeInfo {
  Opcode opcode;
  std::string_view mnemonic;
  Format format;
};

std::optional<OpcodeInfo> opcode_info(std::uint8_t raw);
std::optional<OpcodeInfo> opcode_by_mnemonic(std::string_view mnemonic);

struct Instruction {
  Word raw = 0;

  std::uint8_t opcode() const { return static_cast<std::uint8_t>(raw >> 24); }
  unsigned rd() const { return (raw >> 20) & 0xF; }
  unsigned rs1() const { return (raw >> 16) & 0xF; }
  unsigned rs2() const { return (raw >> 12) & 0xF; }
  std::uint32_t imm16() const { return raw & 0xFFFF; }
  std::int32_t simm16() const { return static_cast<std::int16_t>(raw & 0xFFFF); }
  std::uint32_t imm12() const { return raw & 0xFFF; }
  std::int32_t simm12() const {
    std::int32_t v = static_cast<std::int32_t>(raw & 0xFFF);
    return (v & 0x800) ? v - 0x1000 : v;
  }
};

constexpr Word encode(Opcode op, unsigned rd = 0, unsigned rs1 = 0,
                      unsigned rs2 = 0, std::uint32_t imm12 = 0) {
  return (static_cast<Word>(op) << 24) | ((rd & 0xF) << 20) |
         ((rs1 & 0xF) << 16) | ((rs2 & 0xF) << 12) | (imm12 & 0xFFF);
}

constexpr Word encode16(Opcode op, unsigned rd, unsigned rs1,
                        std::uint32_t imm16) {
  return (static_cast<Word>(op) << 24) | ((rd & 0xF) << 20) |
         ((rs1 & 0xF) << 16) | (imm16 & 0xFFFF);
}

/// One-line disassembly, used by the `asm` listing.
std::string disassemble(Word raw, Address pc);

}  // namespace faultlab
