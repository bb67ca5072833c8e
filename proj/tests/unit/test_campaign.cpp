#include <doctest.h>

#include "faultlab/benchmarks.hpp"
#include "faultlab/campaign.hpp"
#include "faultlab/error.hpp"

#include <algorithm>

using namespace faultlab;

namespace {

const BenchmarkSpec& qsort_spec() {
  static const auto spec = build_benchmark("qsort");
  return spec;
}

const GoldenReference& qsort_golden() {
  static const auto golden = golden_run(qsort_spec(), CampaignConfig{});
  return golden;
}

}  // namespace

TEST_CASE("required repetitions is ceil(E/H)") {
  CHECK(required_repetitions(12, 6) == 2);
  CHECK(required_repetitions(6, 6) == 1);
  CHECK(required_repetitions(7, 6) == 2);
  CHECK(required_repetitions(1, 1) == 1);
  CHECK(required_repetitions(13, 4) == 4);
}

TEST_CASE("slot rotation chunks the event list in order") {
  const auto rot = slot_rotation(kEventCatalog, 5);
  REQUIRE(rot.size() == 3);
  CHECK(rot[0].front() == EventKind::Cycles);
  CHECK(rot[2] == std::vector<EventKind>{EventKind::AluOps, EventKind::Traps});
}

TEST_CASE("config validation") {
  CampaignConfig c;
  c.num_faults = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.hpc_slots = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.timeout_multiplier = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.events.clear();
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("golden run") {
  const auto& g = qsort_golden();
  CHECK(g.output == qsort_spec().expected_output);
  CHECK(g.events.is_complete());
  CHECK_FALSE(check_identities(g.events).has_value());
  CHECK(g.executions == 2);
  CHECK(g.final_bp == qsort_spec().final_bp);
  CHECK(std::is_sorted(g.dynamic_trace.begin(), g.dynamic_trace.end()));
  for (Address a : g.dynamic_trace) CHECK(qsort_spec().image.in_code(a));
  // Init-phase addresses are injectable.
  CHECK(g.dynamic_trace.front() < qsort_spec().task_start);

  // Oracle: one run with an unlimited-counter observer.
  Machine m(qsort_spec().image);
  FullEventCounter counter;
  const Address bp[] = {qsort_spec().final_bp};
  m.run_until(bp, kUnlimitedBudget, &counter);
  CHECK(g.events == counter.windowed());
  CHECK(g.golden_cycles == m.state().cycle);
}

TEST_CASE("golden failures are reported") {
  auto spec = build_custom_benchmark("loop", "__task_start: NOP\n__final_bp: NOP\nHALT\n");
  spec.expected_output = {1};
  CHECK_THROWS_AS(golden_run(spec, CampaignConfig{}), Error);
}

TEST_CASE("fault list generation") {
  CampaignConfig c;
  c.num_faults = 300;
  c.seed = 42;
  const auto a = generate_fault_list(c, qsort_spec(), qsort_golden());
  const auto b = generate_fault_list(c, qsort_spec(), qsort_golden());
  CHECK(a == b);
  CHECK(a.size() == 300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == i);
    CHECK(a[i].target.location == LocationClass::Register);
    CHECK(a[i].target.bits.size() == 1);
    CHECK(std::binary_search(qsort_golden().dynamic_trace.begin(), qsort_golden().dynamic_trace.end(),
                             a[i].trigger));
  }
  c.seed = 43;
  CHECK(generate_fault_list(c, qsort_spec(), qsort_golden()) != a);

  c.location = LocationClass::Memory;
  c.mbu_bits = 3;
  for (const auto& f : generate_fault_list(c, qsort_spec(), qsort_golden())) {
    CHECK(f.target.address % 4 == 0);
    CHECK(f.target.bits.size() == 3);
    CHECK(std::is_sorted(f.target.bits.begin(), f.target.bits.end()));
    CHECK(std::adjacent_find(f.target.bits.begin(), f.target.bits.end()) == f.target.bits.end());
  }
  c.trigger_sampling = TriggerSampling::StaticCodeSpace;
  for (const auto& f : generate_fault_list(c, qsort_spec(), qsort_golden()))
    CHECK(qsort_spec().image.in_code(f.trigger));
}

TEST_CASE("empty trace is an error") {
  auto golden = qsort_golden();
  golden.dynamic_trace.clear();
  CHECK_THROWS_AS(generate_fault_list(CampaignConfig{}, qsort_spec(), golden), Error);
}

TEST_CASE("pc fault outcomes") {
  const auto& g = qsort_golden();
  for (std::uint8_t bit : {0, 1}) {
    Fault f{0, FaultTarget::pc_bits({bit}), g.dynamic_trace[g.dynamic_trace.size() / 2], "qsort"};
    const auto r = inject_and_run(f, qsort_spec(), kEventCatalog, g, 10.0, 12);
    CHECK(r.injected);
    CHECK(classify(r.output, r.stop, g) == Outcome{OutcomeClass::Benign, OutcomeReason::None});
  }
  Fault f{0, FaultTarget::pc_bits({31}), g.dynamic_trace[3], "qsort"};
  const auto r = inject_and_run(f, qsort_spec(), kEventCatalog, g, 10.0, 12);
  CHECK(r.stop == StopReason::trapped(TrapKind::FetchOutOfBounds));
  CHECK(classify(r.output, r.stop, g) == Outcome{OutcomeClass::Other, OutcomeReason::FetchOutOfBounds});
}

TEST_CASE("unreached trigger runs uninjected and is benign") {
  const auto& g = qsort_golden();
  const auto& image = qsort_spec().image;
  std::optional<Address> dead;
  for (Address a = image.code_base; image.in_code(a); a += 4)
    if (!std::binary_search(g.dynamic_trace.begin(), g.dynamic_trace.end(), a)) dead = a;
  REQUIRE(dead.has_value());
  Fault f{0, FaultTarget::reg_bits(2, {5}), *dead, "qsort"};
  const auto r = inject_and_run(f, qsort_spec(), kEventCatalog, g, 10.0, 12);
  CHECK_FALSE(r.injected);
  CHECK(r.output == g.output);
  CHECK(classify(r.output, r.stop, g).cls == OutcomeClass::Benign);
}

TEST_CASE("classification") {
  GoldenReference g;
  g.output = {1, 2, 3};
  g.final_bp = 0x40;
  const auto at_final = StopReason::breakpoint(0x40);
  CHECK(classify(std::vector<std::uint8_t>{1, 2, 3}, at_final, g).cls == OutcomeClass::Benign);
  CHECK(classify(std::vector<std::uint8_t>{1, 2, 4}, at_final, g).cls == OutcomeClass::SDC);
  CHECK(classify(std::vector<std::uint8_t>{1, 2}, at_final, g).cls == OutcomeClass::SDC);
  CHECK(classify({}, StopReason::budget_exceeded(), g) == Outcome{OutcomeClass::Other, OutcomeReason::Timeout});
  CHECK(classify({}, StopReason::trapped(TrapKind::MisalignedAccess), g) ==
        Outcome{OutcomeClass::Other, OutcomeReason::MisalignedAccess});
  CHECK(classify(std::vector<std::uint8_t>{1, 2, 3}, StopReason::halted(), g) ==
        Outcome{OutcomeClass::Other, OutcomeReason::IllegalFlow});
}

TEST_CASE("infinite loop fault times out") {
  const auto spec = build_custom_benchmark(
      "spin", "__task_start: PMUON\nMOVI R1, 0\nl: CMP R1, R0\nBNE l\nOUT R1\nPMUOFF\n__final_bp: NOP\nHALT\n");
  const auto g = golden_run(spec, CampaignConfig{});
  Fault f{0, FaultTarget::reg_bits(1, {4}), spec.image.require_symbol("l"), "spin"};
  const auto r = inject_and_run(f, spec, kEventCatalog, g, 10.0, 12);
  CHECK(r.stop == StopReason::budget_exceeded());
  CHECK(classify(r.output, r.stop, g).reason == OutcomeReason::Timeout);
}

TEST_CASE("campaign execution counts and repetition agreement") {
  CampaignConfig c;
  c.num_faults = 100;
  c.seed = 7;
  const auto report = run_campaign(c);
  CHECK(report.records.size() == 100);
  CHECK(report.faulty_executions == 200);
  CHECK(report.golden.executions == 2);
  for (const auto& r : report.records) {
    REQUIRE(r.repetitions.size() == 2);
    CHECK(r.repetitions[0].stop == r.repetitions[1].stop);
    CHECK(r.repetitions[0].cycles == r.repetitions[1].cycles);
    CHECK(r.repetitions[0].output_digest == r.repetitions[1].output_digest);
    if (r.outcome.cls != OutcomeClass::Other) CHECK(r.events.is_complete());
    if (!r.injected) CHECK(r.outcome.cls == OutcomeClass::Benign);
  }
}

TEST_CASE("campaign results do not depend on worker count") {
  CampaignConfig c;
  c.benchmark = "hash";
  c.location = LocationClass::Memory;
  c.num_faults = 40;
  const auto serial = run_campaign(c);
  c.jobs = 4;
  const auto parallel = run_campaign(c);
  REQUIRE(serial.records.size() == parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].fault == parallel.records[i].fault);
    CHECK(serial.records[i].outcome == parallel.records[i].outcome);
    CHECK(serial.records[i].events == parallel.records[i].events);
    CHECK(serial.records[i].repetitions == parallel.records[i].repetitions);
  }
}

TEST_CASE("output digest is FNV-1a 64") {
  CHECK(output_digest({}) == 0xCBF29CE484222325ull);
  const std::uint8_t a[] = {'a'};
  CHECK(output_digest(a) == 0xAF63DC4C8601EC8Cull);
}
