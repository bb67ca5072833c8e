#include "faultlab/events.hpp"

#include "faultlab/error.hpp"

#include <string>

namespace faultlab {

namespace {

constexpr std::array<std::string_view, kEventCount> kNames = {
    "CYCLES",   "INSTR_RETIRED", "MEM_READ",   "MEM_WRITE",
    "L1D_HIT",  "L1D_MISS",      "BR_EXEC",    "BR_TAKEN",
    "BR_MISPRED", "JUMP_EXEC",   "ALU_OPS",    "TRAPS",
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view event_name(EventKind kind) { return kNames[event_index(kind)]; }

std::optional<EventKind> event_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kEventCount; ++i) {
    if (kNames[i] == name) return kEventCatalog[i];
  }
  return std::nullopt;
}

bool EventVector::operator==(const EventVector& other) const {
  if (present != other.present) return false;
  for (std::size_t i = 0; i < kEventCount; ++i) {
    if (present.test(i) && counts[i] != other.counts[i]) return false;
  }
  return true;
}

std::optional<std::string_view> check_identities(const EventVector& v) {
  using E = EventKind;
  auto all = [&](std::initializer_list<E> kinds) {
    for (E k : kinds)
      if (!v.has(k)) return false;
    return true;
  };
  if (all({E::L1dHit, E::L1dMiss, E::MemRead, E::MemWrite}) &&
      v[E::L1dHit] + v[E::L1dMiss] != v[E::MemRead] + v[E::MemWrite])
    return "L1D_HIT + L1D_MISS == MEM_READ + MEM_WRITE";
  if (all({E::BrTaken, E::BrExec}) && v[E::BrTaken] > v[E::BrExec])
    return "BR_TAKEN <= BR_EXEC";
  if (all({E::BrMispred, E::BrExec}) && v[E::BrMispred] > v[E::BrExec])
    return "BR_MISPRED <= BR_EXEC";
  if (all({E::InstrRetired, E::Cycles}) && v[E::InstrRetired] > v[E::Cycles])
    return "INSTR_RETIRED <= CYCLES";
  if (v.has(E::Traps) && v[E::Traps] > 1) return "TRAPS in {0,1}";
  return std::nullopt;
}

std::vector<EventKind> parse_event_list(std::string_view csv) {
  std::vector<EventKind> out;
  while (!csv.empty()) {
    auto comma = csv.find(',');
    auto item = trim(csv.substr(0, comma));
    if (!item.empty()) {
      auto kind = event_from_name(item);
      if (!kind)
        throw Error(ErrorCode::InvalidConfig,
                    "unknown event '" + std::string(item) + "'");
      for (EventKind k : out)
        if (k == *kind)
          throw Error(ErrorCode::InvalidConfig,
                      "duplicate event '" + std::string(item) + "'");
      out.push_back(*kind);
    }
    if (comma == std::string_view::npos) break;
    csv.remove_prefix(comma + 1);
  }
  return out;
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownMnemonic: return "UnknownMnemonic";
    case ErrorCode::UndefinedLabel: return "UndefinedLabel";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::ImmediateOutOfRange: return "ImmediateOutOfRange";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::ImageTooLarge: return "ImageTooLarge";
    case ErrorCode::SlotOutOfRange: return "SlotOutOfRange";
    case ErrorCode::SlotUnconfigured: return "SlotUnconfigured";
    case ErrorCode::BankEnabled: return "BankEnabled";
    case ErrorCode::BadAddress: return "BadAddress";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::NotHalted: return "NotHalted";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::BadTarget: return "BadTarget";
    case ErrorCode::UnknownBenchmark: return "UnknownBenchmark";
    case ErrorCode::MissingSymbol: return "MissingSymbol";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::GoldenTrapped: return "GoldenTrapped";
    case ErrorCode::GoldenTimeout: return "GoldenTimeout";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::Io: return "Io";
    case ErrorCode::CorruptRecords: return "CorruptRecords";
  }
  return "Unknown";
}

}  // namespace faultlab
