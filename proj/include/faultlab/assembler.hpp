#pragma once

#include "faultlab/isa.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace faultlab {

inline constexpr Address kCodeBase = 0x0000'0000;
/// Default `.data` load address; code must end below it.
inline constexpr Address kDefaultDataBase = 0x0000'4000;

inline constexpr std::string_view kFinalBreakpointSymbol = "__final_bp";
inline constexpr std::string_view kTaskStartSymbol = "__task_start";

struct MemoryRange {
  Address start = 0;
  std::uint32_t length = 0;

  Address end() const { return start + length; }
  bool contains(Address addr) const { return addr >= start && addr - start < length; }
  bool operator==(const MemoryRange&) const = default;
};

struct ProgramImage {
  Address code_base = kCodeBase;
  std::vector<Word> code;
  Address data_base = kDefaultDataBase;
  std::vector<std::uint8_t> data;
  Address entry = kCodeBase;
  std::map<std::string, Address, std::less<>> symbols;
  /// Disjoint used ranges (code, then data when non-empty).
  std::vector<MemoryRange> footprint;

  MemoryRange code_range() const {
    return {code_base, static_cast<std::uint32_t>(code.size() * 4)};
  }
  bool in_code(Address addr) const {
    return (addr & 3) == 0 && code_range().contains(addr);
  }
  std::optional<Address> symbol(std::string_view name) const;
  /// Throws MissingSymbol when absent.
  Address require_symbol(std::string_view name) const;
  /// Highest address covered by the footprint.
  Address footprint_end() const;
};

/// Two-pass assembler for the line-oriented source format documented in
/// docs/ISA.md. Throws AssemblyError (with a 1-based line number) on unknown
/// mnemonics, undefined or duplicate labels, out-of-range immediates and
/// malformed operands. Output is a pure function of `source`.
ProgramImage assemble(std::string_view source);

}  // namespace faultlab
