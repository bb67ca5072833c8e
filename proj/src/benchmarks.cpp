#include "faultlab/benchmarks.hpp"

#include "faultlab/error.hpp"
#include "faultlab/machine.hpp"

#include <algorithm>
#include <limits>

namespace faultlab {

namespace detail {
extern const std::string_view kQsortSource;
extern const std::string_view kDijkstraSource;
extern const std::string_view kHashSource;
}  // namespace detail

namespace reference {

std::vector<Word> qsort(std::vector<Word> input) {
  std::sort(input.begin(), input.end(),
            [](Word a, Word b) { return static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b); });
  return input;
}

std::vector<Word> dijkstra(std::span<const Word> adjacency, std::size_t nodes, std::size_t source) {
  constexpr Word kInf = 0xFFFF;
  std::vector<Word> dist(nodes, kInf);
  std::vector<bool> done(nodes, false);
  dist[source] = 0;
  for (std::size_t iter = 0; iter < nodes; ++iter) {
    std::size_t u = nodes;
    Word best = kInf;
    for (std::size_t v = 0; v < nodes; ++v)
      if (!done[v] && dist[v] < best) best = dist[v], u = v;
    if (u == nodes) break;
    done[u] = true;
    for (std::size_t v = 0; v < nodes; ++v) {
      const Word w = adjacency[u * nodes + v];
      if (w != 0 && !done[v] && dist[u] + w < dist[v]) dist[v] = dist[u] + w;
    }
  }
  return dist;
}

std::array<Word, 4> hash(std::span<const Word> message) {
  auto rotl = [](Word x, unsigned n) { return (x << n) | (x >> (32 - n)); };
  Word h0 = 0x6A09E667, h1 = 0xBB67AE85, h2 = 0x3C6EF372, h3 = 0xA54FF53A;
  for (Word m : message) {
    Word t = rotl(h0 ^ m, 5) + h3;
    t *= 0x9E3779B1u;
    t ^= t >> 15;
    h3 = h2;
    h2 = rotl(h1, 11);
    h1 = h0;
    h0 = t;
  }
  return {h0, h1, h2, h3};
}

}  // namespace reference

std::vector<std::uint8_t> words_to_bytes(std::span<const Word> words) {
  std::vector<std::uint8_t> out;
  out.reserve(words.size() * 4);
  for (Word w : words)
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
  return out;
}

std::vector<Word> image_words(const ProgramImage& image, std::string_view name, std::size_t count) {
  const Address addr = image.require_symbol(name);
  if (addr < image.data_base || addr - image.data_base + count * 4 > image.data.size())
    throw Error(ErrorCode::MissingSymbol, "symbol '" + std::string(name) + "' does not cover " +
                                              std::to_string(count) + " data words");
  std::vector<Word> out(count);
  const auto* p = image.data.data() + (addr - image.data_base);
  for (std::size_t i = 0; i < count; ++i, p += 4)
    out[i] = Word{p[0]} | (Word{p[1]} << 8) | (Word{p[2]} << 16) | (Word{p[3]} << 24);
  return out;
}

std::string_view benchmark_source(std::string_view name) {
  if (name == "qsort") return detail::kQsortSource;
  if (name == "dijkstra") return detail::kDijkstraSource;
  if (name == "hash") return detail::kHashSource;
  throw Error(ErrorCode::UnknownBenchmark, "'" + std::string(name) + "' (expected qsort, dijkstra or hash)");
}

namespace {

BenchmarkSpec assemble_spec(std::string name, std::string_view source) {
  BenchmarkSpec spec;
  spec.name = std::move(name);
  spec.source = std::string(source);
  spec.image = assemble(source);
  spec.task_start = spec.image.require_symbol(kTaskStartSymbol);
  spec.final_bp = spec.image.require_symbol(kFinalBreakpointSymbol);
  if (!spec.image.in_code(spec.final_bp))
    throw Error(ErrorCode::MissingSymbol, "__final_bp must label an instruction");
  return spec;
}

}  // namespace

BenchmarkSpec build_benchmark(std::string_view name) {
  BenchmarkSpec spec = assemble_spec(std::string(name), benchmark_source(name));
  if (name == "qsort") {
    spec.expected_output = words_to_bytes(reference::qsort(image_words(spec.image, "input", 64)));
  } else if (name == "dijkstra") {
    spec.expected_output = words_to_bytes(reference::dijkstra(image_words(spec.image, "adj_init", 256), 16, 0));
  } else {
    spec.expected_output = words_to_bytes(reference::hash(image_words(spec.image, "msg", 64)));
  }
  return spec;
}

BenchmarkSpec build_custom_benchmark(std::string name, std::string_view source) {
  BenchmarkSpec spec = assemble_spec(std::move(name), source);
  Machine m(spec.image);
  const Address bp[] = {spec.final_bp};
  const auto stop = m.run_until(bp, 100'000'000);
  if (!(stop == StopReason::breakpoint(spec.final_bp)))
    throw Error(ErrorCode::GoldenTrapped, "custom benchmark stopped with " + to_string(stop));
  spec.expected_output.assign(m.output().begin(), m.output().end());
  return spec;
}

}  // namespace faultlab
