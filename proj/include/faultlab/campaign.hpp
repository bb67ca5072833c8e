#pragma once

#include "faultlab/benchmarks.hpp"
#include "faultlab/debug_port.hpp"
#include "faultlab/events.hpp"
#include "faultlab/machine.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace faultlab {

enum class TriggerSampling : std::uint8_t { DynamicTrace, StaticCodeSpace };

std::string_view trigger_sampling_name(TriggerSampling mode);  // "dynamic" / "static"
std::optional<TriggerSampling> trigger_sampling_from_name(std::string_view name);

/// Emulated target clock used to express cycle counts as milliseconds.
inline constexpr double kTargetClockHz = 650e6;

/// Cycle cap for fault-free runs; reaching it means the benchmark is broken.
inline constexpr std::uint64_t kGoldenCycleCap = 200'000'000;

struct CampaignConfig {
  std::string benchmark = "qsort";
  LocationClass location = LocationClass::Register;
  std::uint32_t num_faults = 100;
  std::uint64_t seed = 1;
  std::vector<EventKind> events{kEventCatalog.begin(), kEventCatalog.end()};
  unsigned hpc_slots = kDefaultHpcSlots;
  double timeout_multiplier = 10.0;
  unsigned mbu_bits = 1;  // 1 = SBU, k > 1 = MBU(k)
  TriggerSampling trigger_sampling = TriggerSampling::DynamicTrace;
  /// Worker threads. Never affects results.
  unsigned jobs = 1;

  /// Throws InvalidConfig.
  void validate() const;
};

struct GoldenReference {
  std::string benchmark;
  std::vector<std::uint8_t> output;
  std::uint64_t output_digest = 0;
  std::uint64_t golden_cycles = 0;  // cycle counter at `__final_bp`
  EventVector events;
  /// Sorted, de-duplicated addresses executed on the way to `__final_bp`.
  std::vector<Address> dynamic_trace;
  Address final_bp = 0;
  std::uint32_t executions = 0;
};

enum class OutcomeClass : std::uint8_t { Benign, SDC, Other };

enum class OutcomeReason : std::uint8_t {
  None,
  Timeout,
  IllegalOpcode,
  FetchOutOfBounds,
  MemOutOfBounds,
  MisalignedAccess,
  IllegalFlow,  // halted (or stopped elsewhere) without reaching `__final_bp`
};

struct Outcome {
  OutcomeClass cls = OutcomeClass::Benign;
  OutcomeReason reason = OutcomeReason::None;

  bool operator==(const Outcome&) const = default;
};

std::string_view outcome_name(OutcomeClass cls);  // "Benign", "SDC", "Other"
std::optional<OutcomeClass> outcome_from_name(std::string_view name);
std::string_view reason_name(OutcomeReason reason);  // "" for None
std::optional<OutcomeReason> reason_from_name(std::string_view name);

/// 64-bit FNV-1a over the output bytes.
std::uint64_t output_digest(std::span<const std::uint8_t> bytes);

/// ceil(num_events / num_slots).
std::uint32_t required_repetitions(std::size_t num_events, std::size_t num_slots);

/// The fixed rotation: `events` in order, chunked by `num_slots`.
std::vector<std::vector<EventKind>> slot_rotation(std::span<const EventKind> events, unsigned num_slots);

/// Executes required_repetitions(E, H) fault-free runs to `__final_bp`, one
/// per slot group, and merges their readings. Throws GoldenTrapped or
/// GoldenTimeout when the benchmark does not reach `__final_bp`, and
/// GoldenTrapped when its output disagrees with the reference model.
GoldenReference golden_run(const BenchmarkSpec& benchmark, const CampaignConfig& config);

/// Draws config.num_faults faults from a seeded mt19937_64. Throws EmptyTrace.
std::vector<Fault> generate_fault_list(const CampaignConfig& config, const BenchmarkSpec& benchmark,
                                       const GoldenReference& golden);

struct RepetitionResult {
  std::vector<EventKind> slots;
  std::vector<std::uint64_t> counts;  // aligned with `slots`
  StopReason stop;
  std::uint64_t cycles = 0;
  std::vector<std::uint8_t> output;
  std::uint64_t output_digest = 0;
  bool injected = false;
  FlipResult flip;
};

/// One faulty execution: fresh machine, breakpoints on the trigger and
/// `__final_bp`, flip at the first trigger arrival, remove the trigger and
/// resume under a budget of golden_cycles * timeout_multiplier. `observer`, if
/// given, sees every instruction (used for unlimited-counter oracles).
RepetitionResult inject_and_run(const Fault& fault, const BenchmarkSpec& benchmark,
                                std::span<const EventKind> slot_events, const GoldenReference& golden,
                                double timeout_multiplier, unsigned hpc_slots = kDefaultHpcSlots,
                                EventObserver* observer = nullptr);

Outcome classify(std::span<const std::uint8_t> output, const StopReason& stop, const GoldenReference& golden);

struct RepetitionSummary {
  std::vector<EventKind> slots;
  StopReason stop;
  std::uint64_t cycles = 0;
  std::uint64_t output_digest = 0;

  bool operator==(const RepetitionSummary&) const = default;
};

struct CampaignRecord {
  Fault fault;
  Outcome outcome;
  EventVector events;
  bool events_complete = false;
  bool injected = false;
  std::vector<RepetitionSummary> repetitions;
  std::uint64_t output_digest = 0;
  /// Emulated target time of all repetitions at kTargetClockHz.
  double wall_ms = 0.0;
};

struct CampaignReport {
  CampaignConfig config;
  GoldenReference golden;
  std::vector<std::vector<EventKind>> rotation;
  std::vector<Fault> faults;
  std::vector<CampaignRecord> records;  // ordered by fault id
  std::uint64_t faulty_executions = 0;
  /// Host wall-clock per fault, in fault order. Not part of any determinism
  /// contract.
  std::vector<double> host_ms;
  double host_total_ms = 0.0;
};

/// Runs every repetition of one fault and assembles its record.
CampaignRecord run_fault(const Fault& fault, const BenchmarkSpec& benchmark, const GoldenReference& golden,
                         const CampaignConfig& config);

/// golden_run -> generate_fault_list -> run_fault per fault (on config.jobs
/// workers). Individual fault runs never abort the campaign.
CampaignReport run_campaign(const CampaignConfig& config);
CampaignReport run_campaign(const CampaignConfig& config, const BenchmarkSpec& benchmark);

}  // namespace faultlab
