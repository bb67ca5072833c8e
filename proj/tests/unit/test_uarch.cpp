#include <doctest.h>

#include "faultlab/assembler.hpp"
#include "faultlab/error.hpp"
#include "faultlab/machine.hpp"
#include "faultlab/uarch.hpp"

using namespace faultlab;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("data cache hit and miss") {
  DataCache cache;
  EventCounts d{};
  CHECK_FALSE(cache.access(0x40, AccessKind::Read, d));
  CHECK(cache.access(0x40, AccessKind::Read, d));
  CHECK(cache.access(0x44, AccessKind::Write, d));
  CHECK(d[event_index(EventKind::L1dMiss)] == 1);
  CHECK(d[event_index(EventKind::L1dHit)] == 2);
  CHECK(d[event_index(EventKind::MemRead)] == 2);
  CHECK(d[event_index(EventKind::MemWrite)] == 1);
}

TEST_CASE("addresses 4 KiB apart conflict on the same line") {
  // Oracle: direct simulation of a 256-entry tag table.
  std::array<std::optional<std::uint32_t>, 256> tags{};
  auto oracle = [&](Address a) {
    const auto idx = (a / 16) % 256;
    const bool hit = tags[idx] == a / 4096;
    tags[idx] = a / 4096;
    return hit;
  };
  DataCache cache;
  EventCounts d{};
  for (Address a : {0x0000u, 0x1000u, 0x0000u}) {
    const bool expect = oracle(a);
    CHECK_FALSE(expect);
    CHECK(cache.access(a, AccessKind::Read, d) == expect);
  }
}

TEST_CASE("predictor counter walk") {
  BranchPredictor bp;
  EventCounts d{};
  CHECK(bp.counter(0x100) == 0b01);
  auto r = bp.predict_and_resolve(0x100, true, d);
  CHECK_FALSE(r.predicted);
  CHECK(r.mispredicted);
  CHECK(bp.counter(0x100) == 0b10);
  r = bp.predict_and_resolve(0x100, true, d);
  CHECK(r.predicted);
  CHECK(bp.counter(0x100) == 0b11);
  r = bp.predict_and_resolve(0x100, true, d);
  CHECK(r.predicted);
  CHECK_FALSE(r.mispredicted);
  CHECK(d[event_index(EventKind::BrExec)] == 3);
  CHECK(d[event_index(EventKind::BrTaken)] == 3);
  CHECK(d[event_index(EventKind::BrMispred)] == 1);
}

TEST_CASE("alternating outcomes from weakly-not-taken always mispredict") {
  BranchPredictor bp;
  EventCounts d{};
  for (int i = 0; i < 100; ++i) bp.predict_and_resolve(0x20, i % 2 == 0, d);
  CHECK(d[event_index(EventKind::BrMispred)] == 100);
}

TEST_CASE("cost model") {
  CHECK(CostModel::instruction_cost(std::nullopt, std::nullopt) == 1);
  CHECK(CostModel::instruction_cost(false, std::nullopt) == 11);
  CHECK(CostModel::instruction_cost(true, std::nullopt) == 2);
  CHECK(CostModel::instruction_cost(std::nullopt, BranchResolution{false, true}) == 3);
}

TEST_CASE("pmu configuration errors") {
  PmuBank bank(6);
  CHECK(code_of([&] { bank.configure(6, EventKind::Cycles); }) == ErrorCode::SlotOutOfRange);
  CHECK(code_of([&] { (void)bank.read(0); }) == ErrorCode::SlotUnconfigured);
  bank.configure(0, EventKind::Cycles);
  bank.enable();
  CHECK(code_of([&] { bank.configure(1, EventKind::Traps); }) == ErrorCode::BankEnabled);
}

TEST_CASE("pmu counts only while enabled") {
  PmuBank bank(2);
  bank.configure(0, EventKind::Cycles);
  EventCounts d{};
  d[event_index(EventKind::Cycles)] = 5;
  bank.accumulate(d);
  CHECK(bank.read(0) == 0);
  bank.enable();
  bank.accumulate(d);
  bank.accumulate(d);
  CHECK(bank.read(0) == 10);
  bank.disable();
  bank.accumulate(d);
  CHECK(bank.read(0) == 10);
}

TEST_CASE("straight-line program retires seven instructions") {
  // Seven instructions between PMUON and PMUOFF, counting PMUOFF itself.
  const char* src =
      "PMUON\nMOVI R1, 1\nMOVI R2, 2\nADD R3, R1, R2\nSUB R4, R3, R1\nXOR R5, R4, R4\nNOP\nPMUOFF\nHALT\n";
  const auto image = assemble(src);
  Machine m(image);
  m.pmu().configure(0, EventKind::InstrRetired);
  m.pmu().configure(1, EventKind::Cycles);
  m.run_until({}, 1000);
  CHECK(m.pmu().read(0) == 7);
  CHECK(m.pmu().read(1) >= m.pmu().read(0));
}

TEST_CASE("counter subset consistency") {
  const auto image = assemble(
      ".data\nv: .word 1,2,3,4\n.text\nPMUON\nMOVI R1, v\nMOVI R5, 4\nl: LOADW R2, [R1+0]\nADD R3, R3, R2\n"
      "ADDI R1, R1, 4\nADDI R5, R5, -1\nCMP R5, R0\nBNE l\nPMUOFF\nHALT\n");
  std::array<std::uint64_t, kEventCount> first{};
  for (unsigned offset = 0; offset < 3; ++offset) {
    for (std::size_t base = 0; base < kEventCount; base += 4) {
      Machine m(image, kDefaultMemSize, 4);
      for (unsigned s = 0; s < 4; ++s)
        m.pmu().configure((s + offset) % 4, kEventCatalog[base + s]);
      m.run_until({}, 10000);
      for (unsigned s = 0; s < 4; ++s) {
        const auto v = m.pmu().read((s + offset) % 4);
        if (offset == 0) first[base + s] = v;
        CHECK(v == first[base + s]);
      }
    }
  }
  CHECK(first[event_index(EventKind::BrExec)] == 4);
  CHECK(first[event_index(EventKind::MemRead)] == 4);
}
