#include <doctest.h>

#include "faultlab/assembler.hpp"
#include "faultlab/debug_port.hpp"
#include "faultlab/error.hpp"

using namespace faultlab;

namespace {

const char* kLoop =
    ".data\nbuf: .word 0, 0\n.text\nMOVI R1, 1\nMOVI R2, 0\nl: ADD R2, R2, R1\nCMP R2, R3\nBNE l\nMOVI R4, buf\n"
    "STOREW R2, [R4+0]\nOUT R2\nHALT\n";

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidConfig;
}

DebugSession session(const char* src = kLoop) { return DebugSession(Machine(assemble(src))); }

}  // namespace

TEST_CASE("breakpoints stop before the instruction executes") {
  auto s = session();
  s.write_register(3, 3);
  s.set_breakpoint(8);
  s.set_breakpoint(8);
  CHECK(s.breakpoints().size() == 1);
  CHECK(s.resume(10000) == StopReason::breakpoint(8));
  CHECK(s.read_register(2) == 0);
  CHECK(s.resume(10000) == StopReason::breakpoint(8));
  CHECK(s.read_register(2) == 1);
  s.remove_breakpoint(8);
  CHECK(s.resume(10000) == StopReason::halted());
  CHECK(s.read_register(2) == 3);
}

TEST_CASE("breakpoints must be aligned code addresses") {
  auto s = session();
  CHECK(code_of([&] { s.set_breakpoint(2); }) == ErrorCode::BadAddress);
  CHECK(code_of([&] { s.set_breakpoint(0x4000); }) == ErrorCode::BadAddress);
}

TEST_CASE("register access") {
  auto s = session();
  s.write_register(7, 0xDEADBEEF);
  CHECK(s.read_register(7) == 0xDEADBEEF);
  CHECK(code_of([&] { (void)s.read_register(16); }) == ErrorCode::BadIndex);
}

TEST_CASE("memory access") {
  auto s = session();
  const std::uint8_t bytes[] = {1, 2, 3, 4};
  s.write_memory(0x4000, bytes);
  CHECK(s.read_memory(0x4000, 4) == std::vector<std::uint8_t>{1, 2, 3, 4});
  CHECK(s.read_memory(0x4000, 0).empty());
  CHECK(code_of([&] { (void)s.read_memory(kDefaultMemSize - 2, 4); }) == ErrorCode::OutOfBounds);
}

TEST_CASE("debug access while executing is refused") {
  auto s = session();
  struct Poke : EventObserver {
    DebugSession* s = nullptr;
    int refused = 0;
    void on_instruction(Address, const EventCounts&, bool) override {
      try {
        s->write_register(1, 0);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NotHalted) ++refused;
      }
    }
  } poke;
  poke.s = &s;
  s.write_register(3, 2);
  s.resume(10000, &poke);
  CHECK(poke.refused > 0);
  CHECK(s.read_register(2) == 2);
}

TEST_CASE("flip_bits xors the mask and is an involution") {
  auto s = session();
  s.write_register(1, 1);
  auto r = s.flip_bits(FaultTarget::reg_bits(1, {0}));
  CHECK(r.old_value == 1);
  CHECK(r.new_value == 0);
  s.write_register(5, 0);
  r = s.flip_bits(FaultTarget::reg_bits(5, {31}));
  CHECK(r.new_value == 0x80000000u);

  const FaultTarget targets[] = {FaultTarget::reg_bits(9, {3, 17}), FaultTarget::pc_bits({1, 30}),
                                 FaultTarget::mem_bits(0x4004, {0, 8, 31}),
                                 FaultTarget::mem_bits(kDefaultMemSize - 4, {12})};
  for (const auto& t : targets) {
    const auto first = s.flip_bits(t);
    CHECK(first.new_value == (first.old_value ^ t.mask()));
    const auto second = s.flip_bits(t);
    CHECK(second.new_value == first.old_value);
  }
}

TEST_CASE("pc flips apply to the held pc") {
  auto s = session();
  s.set_breakpoint(8);
  s.write_register(3, 3);
  s.resume(10000);
  const auto r = s.flip_bits(FaultTarget::pc_bits({0}));
  CHECK(r.old_value == 8);
  CHECK(s.read_pc() == 9);
  s.remove_breakpoint(8);
  CHECK(s.resume(10000) == StopReason::halted());
  CHECK(s.read_register(2) == 3);
}

TEST_CASE("target validation") {
  auto s = session();
  CHECK(code_of([&] { s.validate(FaultTarget::reg_bits(16, {0})); }) == ErrorCode::BadTarget);
  CHECK(code_of([&] { s.validate(FaultTarget::reg_bits(1, {})); }) == ErrorCode::BadTarget);
  CHECK(code_of([&] { s.validate(FaultTarget::reg_bits(1, {32})); }) == ErrorCode::BadTarget);
  CHECK(code_of([&] { s.validate(FaultTarget::reg_bits(1, {4, 4})); }) == ErrorCode::BadTarget);
  CHECK(code_of([&] { s.validate(FaultTarget::mem_bits(0x4002, {0})); }) == ErrorCode::BadTarget);
  CHECK(code_of([&] { s.validate(FaultTarget::mem_bits(0x8000, {0})); }) == ErrorCode::BadTarget);
  s.validate(FaultTarget::mem_bits(0x0, {0}));
  s.validate(FaultTarget::mem_bits(0x4004, {0}));
}

TEST_CASE("debug operations are not intrusive") {
  auto a = session();
  auto b = session();
  a.write_register(3, 3);
  b.write_register(3, 3);
  a.set_breakpoint(8);
  a.resume(10000);
  (void)a.read_memory(0x4000, 8);
  (void)a.read_register(2);
  a.flip_bits(FaultTarget::reg_bits(6, {4}));
  a.flip_bits(FaultTarget::reg_bits(6, {4}));
  a.remove_breakpoint(8);
  FullEventCounter ca, cb;
  a.resume(10000, &ca);
  b.resume(10000, &cb);
  CHECK(a.machine().state().cycle == b.machine().state().cycle);
  CHECK(a.machine().state().regs == b.machine().state().regs);
}
