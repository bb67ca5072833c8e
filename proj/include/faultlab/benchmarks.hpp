#pragma once

#include "faultlab/assembler.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faultlab {

inline constexpr std::array<std::string_view, 3> kBenchmarkNames = {"qsort", "dijkstra", "hash"};

/// An instrumented workload: init phase, `__task_start`, PMUON, task body,
/// PMUOFF, `__final_bp`, HALT.
struct BenchmarkSpec {
  std::string name;
  std::string source;
  ProgramImage image;
  /// What the task must print, from a host-side reference model of the
  /// workload over the image's embedded input.
  std::vector<std::uint8_t> expected_output;
  Address task_start = 0;
  Address final_bp = 0;
};

/// Bundled assembly source. Throws UnknownBenchmark.
std::string_view benchmark_source(std::string_view name);

/// Throws UnknownBenchmark for names outside kBenchmarkNames.
BenchmarkSpec build_benchmark(std::string_view name);

/// Assembles an arbitrary instrumented program. It must define `__task_start`
/// and `__final_bp` (MissingSymbol otherwise). Without a reference model the
/// expected output is taken from an unfaulted run to `__final_bp`.
BenchmarkSpec build_custom_benchmark(std::string name, std::string_view source);

namespace reference {

// Host-side models of the bundled workloads.
std::vector<Word> qsort(std::vector<Word> input);
std::vector<Word> dijkstra(std::span<const Word> adjacency, std::size_t nodes, std::size_t source);
std::array<Word, 4> hash(std::span<const Word> message);

}  // namespace reference

/// Packs words into the little-endian byte stream OUT produces.
std::vector<std::uint8_t> words_to_bytes(std::span<const Word> words);

/// Reads `count` words of initialized data starting at symbol `name`.
std::vector<Word> image_words(const ProgramImage& image, std::string_view name, std::size_t count);

}  // namespace faultlab
