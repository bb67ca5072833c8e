#include "faultlab/campaign.hpp"

#include "faultlab/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

namespace faultlab {

std::string_view trigger_sampling_name(TriggerSampling mode) {
  return mode == TriggerSampling::DynamicTrace ? "dynamic" : "static";
}

std::optional<TriggerSampling> trigger_sampling_from_name(std::string_view name) {
  if (name == "dynamic") return TriggerSampling::DynamicTrace;
  if (name == "static") return TriggerSampling::StaticCodeSpace;
  return std::nullopt;
}

std::string_view outcome_name(OutcomeClass cls) {
  switch (cls) {
    case OutcomeClass::Benign: return "Benign";
    case OutcomeClass::SDC: return "SDC";
    case OutcomeClass::Other: return "Other";
  }
  return "Unknown";
}

std::optional<OutcomeClass> outcome_from_name(std::string_view name) {
  if (name == "Benign") return OutcomeClass::Benign;
  if (name == "SDC") return OutcomeClass::SDC;
  if (name == "Other") return OutcomeClass::Other;
  return std::nullopt;
}

std::string_view reason_name(OutcomeReason reason) {
  switch (reason) {
    case OutcomeReason::None: return "";
    case OutcomeReason::Timeout: return "Timeout";
    case OutcomeReason::IllegalOpcode: return "IllegalOpcode";
    case OutcomeReason::FetchOutOfBounds: return "FetchOutOfBounds";
    case OutcomeReason::MemOutOfBounds: return "MemOutOfBounds";
    case OutcomeReason::MisalignedAccess: return "MisalignedAccess";
    case OutcomeReason::IllegalFlow: return "IllegalFlow";
  }
  return "";
}

std::optional<OutcomeReason> reason_from_name(std::string_view name) {
  for (auto r : {OutcomeReason::None, OutcomeReason::Timeout, OutcomeReason::IllegalOpcode,
                 OutcomeReason::FetchOutOfBounds, OutcomeReason::MemOutOfBounds,
                 OutcomeReason::MisalignedAccess, OutcomeReason::IllegalFlow})
    if (reason_name(r) == name) return r;
  return std::nullopt;
}

void CampaignConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (num_faults < 1) bad("num_faults must be >= 1");
  if (hpc_slots < 1) bad("hpc_slots must be >= 1");
  if (!(timeout_multiplier > 1.0)) bad("timeout_multiplier must be > 1");
  if (mbu_bits < 1 || mbu_bits > 32) bad("fault model bit count must be in [1, 32]");
  if (events.empty()) bad("events must not be empty");
  for (std::size_t i = 0; i < events.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (events[i] == events[j]) bad("duplicate event " + std::string(event_name(events[i])));
}

std::uint64_t output_digest(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint32_t required_repetitions(std::size_t num_events, std::size_t num_slots) {
  return static_cast<std::uint32_t>((num_events + num_slots - 1) / num_slots);
}

std::vector<std::vector<EventKind>> slot_rotation(std::span<const EventKind> events, unsigned num_slots) {
  std::vector<std::vector<EventKind>> groups;
  for (std::size_t i = 0; i < events.size(); i += num_slots) {
    auto end = std::min(events.size(), i + num_slots);
    groups.emplace_back(events.begin() + static_cast<std::ptrdiff_t>(i),
                        events.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return groups;
}

namespace {

class TraceRecorder : public EventObserver {
 public:
  void on_instruction(Address pc, const EventCounts& delta, bool) override {
    if (delta[event_index(EventKind::InstrRetired)] != 0) pcs_.push_back(pc);
  }
  std::vector<Address> take() {
    std::sort(pcs_.begin(), pcs_.end());
    pcs_.erase(std::unique(pcs_.begin(), pcs_.end()), pcs_.end());
    return std::move(pcs_);
  }

 private:
  std::vector<Address> pcs_;
};

void configure_slots(Machine& m, std::span<const EventKind> slot_events) {
  for (std::size_t i = 0; i < slot_events.size(); ++i) m.pmu().configure(static_cast<unsigned>(i), slot_events[i]);
}

std::vector<std::uint64_t> read_slots(const Machine& m, std::size_t n) {
  std::vector<std::uint64_t> counts(n);
  for (std::size_t i = 0; i < n; ++i) counts[i] = m.pmu().read(static_cast<unsigned>(i));
  return counts;
}

// Unbiased draw from [0, n).
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

std::vector<std::uint8_t> draw_bits(std::mt19937_64& rng, unsigned count) {
  std::vector<std::uint8_t> bits;
  while (bits.size() < count) {
    auto b = static_cast<std::uint8_t>(uniform_below(rng, 32));
    if (std::find(bits.begin(), bits.end(), b) == bits.end()) bits.push_back(b);
  }
  std::sort(bits.begin(), bits.end());
  return bits;
}

// Disjoint, sorted ranges covering the footprint and the stack region.
std::vector<MemoryRange> memory_pool(const ProgramImage& image, std::size_t mem_size) {
  std::vector<MemoryRange> ranges = image.footprint;
  ranges.push_back(stack_region(mem_size));
  std::sort(ranges.begin(), ranges.end(), [](auto& a, auto& b) { return a.start < b.start; });
  std::vector<MemoryRange> merged;
  for (const auto& r : ranges) {
    // Word-align each range inward.
    Address start = (r.start + 3) & ~Address{3};
    Address end = r.end() & ~Address{3};
    if (end <= start) continue;
    if (!merged.empty() && start <= merged.back().end()) {
      auto& last = merged.back();
      last.length = std::max(last.end(), end) - last.start;
    } else {
      merged.push_back({start, end - start});
    }
  }
  return merged;
}

}  // namespace

GoldenReference golden_run(const BenchmarkSpec& benchmark, const CampaignConfig& config) {
  GoldenReference golden;
  golden.benchmark = benchmark.name;
  golden.final_bp = benchmark.final_bp;
  golden.events.counts.fill(0);

  const auto rotation = slot_rotation(config.events, config.hpc_slots);
  bool first = true;
  for (const auto& group : rotation) {
    DebugSession session(Machine(benchmark.image, kDefaultMemSize, config.hpc_slots));
    configure_slots(session.machine(), group);
    session.set_breakpoint(benchmark.final_bp);
    TraceRecorder trace;
    const auto stop = session.resume(kGoldenCycleCap, first ? &trace : nullptr);
    ++golden.executions;
    if (stop.kind == StopReason::Kind::BudgetExceeded)
      throw Error(ErrorCode::GoldenTimeout, benchmark.name + " did not reach __final_bp within the golden cycle cap");
    if (!(stop == StopReason::breakpoint(benchmark.final_bp)))
      throw Error(ErrorCode::GoldenTrapped, benchmark.name + " golden run stopped with " + to_string(stop));

    const auto& m = session.machine();
    const auto counts = read_slots(m, group.size());
    for (std::size_t i = 0; i < group.size(); ++i) golden.events.set(group[i], counts[i]);

    if (first) {
      golden.output.assign(m.output().begin(), m.output().end());
      golden.golden_cycles = m.state().cycle;
      golden.dynamic_trace = trace.take();
      first = false;
    } else if (m.state().cycle != golden.golden_cycles ||
               !std::equal(m.output().begin(), m.output().end(), golden.output.begin(), golden.output.end())) {
      throw Error(ErrorCode::GoldenTrapped, benchmark.name + " golden repetitions disagree");
    }
  }
  golden.output_digest = output_digest(golden.output);
  if (golden.output != benchmark.expected_output)
    throw Error(ErrorCode::GoldenTrapped, benchmark.name + " golden output differs from the reference model");
  return golden;
}

std::vector<Fault> generate_fault_list(const CampaignConfig& config, const BenchmarkSpec& benchmark,
                                       const GoldenReference& golden) {
  config.validate();
  std::vector<Address> triggers;
  if (config.trigger_sampling == TriggerSampling::DynamicTrace) {
    triggers = golden.dynamic_trace;
  } else {
    const auto code = benchmark.image.code_range();
    for (Address a = code.start; a < code.end(); a += 4) triggers.push_back(a);
  }
  if (triggers.empty()) throw Error(ErrorCode::EmptyTrace, "no candidate trigger addresses");

  const auto pool = memory_pool(benchmark.image, kDefaultMemSize);
  std::uint64_t pool_words = 0;
  for (const auto& r : pool) pool_words += r.length / 4;

  std::mt19937_64 rng(config.seed);
  std::vector<Fault> faults;
  faults.reserve(config.num_faults);
  for (std::uint32_t id = 0; id < config.num_faults; ++id) {
    Fault f;
    f.id = id;
    f.benchmark = benchmark.name;
    f.target.location = config.location;
    switch (config.location) {
      case LocationClass::Register:
        f.target.reg = static_cast<unsigned>(uniform_below(rng, kNumRegisters));
        break;
      case LocationClass::ProgramCounter: break;
      case LocationClass::Memory: {
        auto word = uniform_below(rng, pool_words);
        for (const auto& r : pool) {
          if (word < r.length / 4) {
            f.target.address = r.start + static_cast<Address>(word * 4);
            break;
          }
          word -= r.length / 4;
        }
        break;
      }
    }
    f.target.bits = draw_bits(rng, config.mbu_bits);
    f.trigger = triggers[uniform_below(rng, triggers.size())];
    faults.push_back(std::move(f));
  }
  return faults;
}

RepetitionResult inject_and_run(const Fault& fault, const BenchmarkSpec& benchmark,
                                std::span<const EventKind> slot_events, const GoldenReference& golden,
                                double timeout_multiplier, unsigned hpc_slots, EventObserver* observer) {
  RepetitionResult r;
  r.slots.assign(slot_events.begin(), slot_events.end());

  DebugSession session(Machine(benchmark.image, kDefaultMemSize, hpc_slots));
  configure_slots(session.machine(), slot_events);
  session.set_breakpoint(benchmark.final_bp);
  session.set_breakpoint(fault.trigger);

  const auto budget =
      static_cast<std::uint64_t>(std::ceil(static_cast<double>(golden.golden_cycles) * timeout_multiplier));
  r.stop = session.resume(budget, observer);
  if (r.stop == StopReason::breakpoint(fault.trigger)) {
    r.flip = session.flip_bits(fault.target);
    r.injected = true;
    if (fault.trigger != benchmark.final_bp) {
      session.remove_breakpoint(fault.trigger);
      r.stop = session.resume(budget, observer);
    }
  }

  const auto& m = session.machine();
  r.counts = read_slots(m, slot_events.size());
  r.cycles = m.state().cycle;
  r.output.assign(m.output().begin(), m.output().end());
  r.output_digest = output_digest(r.output);
  return r;
}

Outcome classify(std::span<const std::uint8_t> output, const StopReason& stop, const GoldenReference& golden) {
  switch (stop.kind) {
    case StopReason::Kind::Breakpoint:
      if (stop.address != golden.final_bp) return {OutcomeClass::Other, OutcomeReason::IllegalFlow};
      if (std::equal(output.begin(), output.end(), golden.output.begin(), golden.output.end()))
        return {OutcomeClass::Benign, OutcomeReason::None};
      return {OutcomeClass::SDC, OutcomeReason::None};
    case StopReason::Kind::Halted: return {OutcomeClass::Other, OutcomeReason::IllegalFlow};
    case StopReason::Kind::BudgetExceeded: return {OutcomeClass::Other, OutcomeReason::Timeout};
    case StopReason::Kind::Trapped:
      switch (stop.trap) {
        case TrapKind::IllegalOpcode: return {OutcomeClass::Other, OutcomeReason::IllegalOpcode};
        case TrapKind::FetchOutOfBounds: return {OutcomeClass::Other, OutcomeReason::FetchOutOfBounds};
        case TrapKind::MemOutOfBounds: return {OutcomeClass::Other, OutcomeReason::MemOutOfBounds};
        case TrapKind::MisalignedAccess: return {OutcomeClass::Other, OutcomeReason::MisalignedAccess};
      }
  }
  return {OutcomeClass::Other, OutcomeReason::IllegalFlow};
}

CampaignRecord run_fault(const Fault& fault, const BenchmarkSpec& benchmark, const GoldenReference& golden,
                         const CampaignConfig& config) {
  CampaignRecord rec;
  rec.fault = fault;
  rec.events.counts.fill(0);
  std::uint64_t total_cycles = 0;
  bool all_final = true;
  std::optional<RepetitionResult> first;
  for (const auto& group : slot_rotation(config.events, config.hpc_slots)) {
    auto rep = inject_and_run(fault, benchmark, group, golden, config.timeout_multiplier, config.hpc_slots);
    for (std::size_t i = 0; i < group.size(); ++i) rec.events.set(group[i], rep.counts[i]);
    rec.repetitions.push_back({rep.slots, rep.stop, rep.cycles, rep.output_digest});
    total_cycles += rep.cycles;
    all_final = all_final && rep.stop == StopReason::breakpoint(golden.final_bp);
    if (!first) first = std::move(rep);
  }
  rec.outcome = classify(first->output, first->stop, golden);
  rec.injected = first->injected;
  rec.output_digest = first->output_digest;
  rec.events_complete = all_final;
  rec.wall_ms = static_cast<double>(total_cycles) / (kTargetClockHz / 1000.0);
  return rec;
}

CampaignReport run_campaign(const CampaignConfig& config) {
  config.validate();
  return run_campaign(config, build_benchmark(config.benchmark));
}

CampaignReport run_campaign(const CampaignConfig& config, const BenchmarkSpec& benchmark) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();

  CampaignReport report;
  report.config = config;
  report.config.benchmark = benchmark.name;
  report.rotation = slot_rotation(config.events, config.hpc_slots);
  report.golden = golden_run(benchmark, config);
  report.faults = generate_fault_list(config, benchmark, report.golden);

  const std::size_t n = report.faults.size();
  report.records.resize(n);
  report.host_ms.assign(n, 0.0);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const auto start = Clock::now();
      report.records[i] = run_fault(report.faults[i], benchmark, report.golden, config);
      report.host_ms[i] = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
  };
  const unsigned jobs = std::max(1u, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  report.faulty_executions = static_cast<std::uint64_t>(n) * report.rotation.size();
  report.host_total_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return report;
}

}  // namespace faultlab
