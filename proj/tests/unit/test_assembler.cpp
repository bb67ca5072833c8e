#include <doctest.h>

#include "faultlab/assembler.hpp"
#include "faultlab/error.hpp"
#include "faultlab/isa.hpp"

using namespace faultlab;

namespace {

ErrorCode assembly_error(std::string_view src, int* line = nullptr) {
  try {
    assemble(src);
  } catch (const AssemblyError& e) {
    if (line) *line = e.line();
    return e.code();
  }
  FAIL("expected an assembly error");
  return ErrorCode::SyntaxError;
}

}  // namespace

TEST_CASE("single HALT assembles to one instruction at the code base") {
  const auto image = assemble("HALT\n");
  REQUIRE(image.code.size() == 1);
  CHECK(image.entry == kCodeBase);
  CHECK(Instruction{image.code[0]}.opcode() == static_cast<std::uint8_t>(Opcode::Halt));
}

TEST_CASE("encoding fields land in their documented bit positions") {
  const auto image = assemble("ADD R1, R2, R3\nMOVI R4, 0xBEEF\nLOADW R5, [R6+-4]\n");
  CHECK(image.code[0] == 0x08123000u);
  CHECK(image.code[1] == 0x0340BEEFu);
  CHECK(image.code[2] == 0x18560FFCu);
  CHECK(Instruction{image.code[2]}.simm12() == -4);
}

TEST_CASE("forward branch resolves to a word offset from pc+4") {
  const auto image = assemble("  JMP end\n  NOP\n  NOP\nend: HALT\n");
  const Instruction jmp{image.code[0]};
  CHECK(jmp.simm16() == 2);
  CHECK(image.require_symbol("end") == 12);
}

TEST_CASE("backward branch has a negative offset") {
  const auto image = assemble("top: NOP\n  BNE top\n");
  CHECK(Instruction{image.code[1]}.simm16() == -2);
}

TEST_CASE("assembly is deterministic byte for byte") {
  const char* src = ".data\nx: .word 1, 2, lbl\n.text\nlbl: MOVI R1, 3\nOUT R1\nHALT\n";
  const auto a = assemble(src);
  const auto b = assemble(src);
  CHECK(a.code == b.code);
  CHECK(a.data == b.data);
  CHECK(a.symbols == b.symbols);
}

TEST_CASE("data directives and footprint") {
  const auto image = assemble(".data\nbuf: .space 8\nval: .word 0x01020304\n.text\nHALT\n");
  CHECK(image.require_symbol("buf") == kDefaultDataBase);
  CHECK(image.require_symbol("val") == kDefaultDataBase + 8);
  REQUIRE(image.data.size() == 12);
  CHECK(image.data[8] == 0x04);
  CHECK(image.data[11] == 0x01);
  CHECK(image.footprint_end() == kDefaultDataBase + 12);
}

TEST_CASE("errors carry a code and line number") {
  int line = 0;
  CHECK(assembly_error("NOP\nMOVI R1, 70000\n", &line) == ErrorCode::ImmediateOutOfRange);
  CHECK(line == 2);
  CHECK(assembly_error("FROB R1\n", &line) == ErrorCode::UnknownMnemonic);
  CHECK(line == 1);
  CHECK(assembly_error("NOP\nNOP\nJMP nowhere\n", &line) == ErrorCode::UndefinedLabel);
  CHECK(line == 3);
  CHECK(assembly_error("a: NOP\na: NOP\n") == ErrorCode::DuplicateLabel);
  CHECK(assembly_error("SHL R1, R1, 32\n") == ErrorCode::ImmediateOutOfRange);
  CHECK(assembly_error("ADD R1, R2\n") == ErrorCode::SyntaxError);
}

TEST_CASE("register aliases") {
  const auto image = assemble("PUSH LR\nMOV R1, SP\n");
  CHECK(Instruction{image.code[0]}.rd() == kLinkRegister);
  CHECK(Instruction{image.code[1]}.rs1() == kStackPointer);
}

TEST_CASE("disassembly round trips through the assembler") {
  const auto image = assemble("start: ADDI R3, R4, -7\nSTOREW R2, [R14+8]\nCMP R1, R2\nBLT start\nOUT R9\nRET\n");
  std::string listing;
  for (std::size_t i = 0; i < image.code.size(); ++i) {
    auto text = disassemble(image.code[i], static_cast<Address>(i * 4));
    // Branch targets are printed as absolute addresses; swap them back for a label.
    if (text.rfind("BLT", 0) == 0) text = "BLT start";
    listing += text + "\n";
  }
  const auto again = assemble("start: " + listing);
  CHECK(again.code == image.code);
}
