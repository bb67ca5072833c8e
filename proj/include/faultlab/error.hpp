#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace faultlab {

enum class ErrorCode {
  // assembler
  UnknownMnemonic,
  UndefinedLabel,
  DuplicateLabel,
  ImmediateOutOfRange,
  SyntaxError,
  // loader
  ImageTooLarge,
  // uarch-pmu
  SlotOutOfRange,
  SlotUnconfigured,
  BankEnabled,
  // debug port
  BadAddress,
  BadIndex,
  NotHalted,
  OutOfBounds,
  BadTarget,
  // benchmarks / campaign
  UnknownBenchmark,
  MissingSymbol,
  EmptyTrace,
  GoldenTrapped,
  GoldenTimeout,
  InvalidConfig,
  // analysis
  TooFewRows,
  EmptyInput,
  DegenerateCovariance,
  // persistence
  Io,
  CorruptRecords,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Assembly failures carry the 1-based source line.
class AssemblyError : public Error {
 public:
  AssemblyError(ErrorCode code, int line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace faultlab
