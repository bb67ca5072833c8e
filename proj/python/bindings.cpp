#include "faultlab/faultlab.hpp"

#include <json.hpp>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace faultlab;

namespace {

py::bytes to_bytes(std::span<const std::uint8_t> b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::dict events_dict(const EventVector& v) {
  py::dict d;
  for (auto kind : kEventCatalog)
    if (v.has(kind)) d[py::str(std::string(event_name(kind)))] = v[kind];
  return d;
}

// Keyword arguments mirror the JSON config keys and go through the same parser.
CampaignConfig config_from_kwargs(const py::kwargs& kwargs) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : kwargs) {
    const auto k = py::cast<std::string>(key);
    if (value.is_none()) continue;
    if (py::isinstance<py::bool_>(value)) {
      j[k] = value.cast<bool>();
    } else if (py::isinstance<py::int_>(value)) {
      j[k] = value.cast<std::uint64_t>();
    } else if (py::isinstance<py::float_>(value)) {
      j[k] = value.cast<double>();
    } else if (py::isinstance<py::str>(value)) {
      j[k] = value.cast<std::string>();
    } else {
      j[k] = value.cast<std::vector<std::string>>();
    }
  }
  return parse_config_json(j.dump());
}

py::dict golden_dict(const GoldenReference& g) {
  py::dict d;
  d["benchmark"] = g.benchmark;
  d["output"] = to_bytes(g.output);
  d["output_digest"] = g.output_digest;
  d["golden_cycles"] = g.golden_cycles;
  d["events"] = events_dict(g.events);
  d["dynamic_trace"] = g.dynamic_trace;
  d["final_bp"] = g.final_bp;
  d["executions"] = g.executions;
  return d;
}

py::dict record_dict(const CampaignRecord& r) {
  py::dict fault;
  fault["id"] = r.fault.id;
  fault["location"] = std::string(location_name(r.fault.target.location));
  fault["register"] = r.fault.target.reg;
  fault["address"] = r.fault.target.address;
  fault["bits"] = r.fault.target.bits;
  fault["trigger"] = r.fault.trigger;
  py::list reps;
  for (const auto& rep : r.repetitions) {
    py::dict d;
    py::list slots;
    for (auto e : rep.slots) slots.append(std::string(event_name(e)));
    d["slots"] = slots;
    d["stop"] = to_string(rep.stop);
    d["cycles"] = rep.cycles;
    d["output_digest"] = rep.output_digest;
    reps.append(d);
  }
  py::dict d;
  d["fault"] = fault;
  d["outcome"] = std::string(outcome_name(r.outcome.cls));
  d["reason"] = std::string(reason_name(r.outcome.reason));
  d["events"] = events_dict(r.events);
  d["events_complete"] = r.events_complete;
  d["injected"] = r.injected;
  d["repetitions"] = reps;
  d["output_digest"] = r.output_digest;
  d["wall_ms"] = r.wall_ms;
  return d;
}

py::dict campaign_dict(const CampaignReport& report) {
  py::list records;
  for (const auto& r : report.records) records.append(record_dict(r));
  py::dict d;
  d["config"] = py::module_::import("json").attr("loads")(config_to_json(report.config));
  d["golden"] = golden_dict(report.golden);
  d["records"] = records;
  d["faulty_executions"] = report.faulty_executions;
  d["records_jsonl"] = records_jsonl(report.records);
  d["faults_csv"] = faults_csv(report.faults);
  return d;
}

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  auto v = a.unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = v(r, c);
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  auto v = a.mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) v(r, c) = m(r, c);
  return a;
}

StopReason parse_stop(const std::string& s, Address final_bp) {
  if (s == "final") return StopReason::breakpoint(final_bp);
  if (s == "halted") return StopReason::halted();
  if (s == "budget") return StopReason::budget_exceeded();
  for (auto t : {TrapKind::IllegalOpcode, TrapKind::FetchOutOfBounds, TrapKind::MemOutOfBounds,
                 TrapKind::MisalignedAccess})
    if (s == "trap:" + std::string(trap_name(t))) return StopReason::trapped(t);
  throw py::value_error("stop must be final, halted, budget or trap:<kind>");
}

}  // namespace

PYBIND11_MODULE(_faultlab, m) {
  m.doc() = "Soft-error injection on an emulated 32-bit target";
  m.attr("__version__") = std::string(kToolVersion);

  static py::exception<Error> error(m, "FaultlabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(error_code_name(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::list events, benches;
  for (auto kind : kEventCatalog) events.append(std::string(event_name(kind)));
  for (auto name : kBenchmarkNames) benches.append(std::string(name));
  m.attr("EVENT_NAMES") = events;
  m.attr("BENCHMARK_NAMES") = benches;

  m.def(
      "assemble",
      [](const std::string& source) {
        const auto image = assemble(source);
        py::dict d;
        d["code_base"] = image.code_base;
        d["code"] = image.code;
        d["data_base"] = image.data_base;
        d["data"] = to_bytes(image.data);
        d["entry"] = image.entry;
        d["symbols"] = std::map<std::string, Address>(image.symbols.begin(), image.symbols.end());
        return d;
      },
      py::arg("source"), "Assemble source text into a program image.");

  m.def(
      "run_program",
      [](std::optional<std::string> source, std::optional<std::string> benchmark, std::uint64_t budget) {
        if (source.has_value() == benchmark.has_value())
          throw py::value_error("give exactly one of source or benchmark");
        const auto image = assemble(benchmark ? std::string(benchmark_source(*benchmark)) : *source);
        Machine machine(image);
        std::vector<Address> bps;
        if (auto fb = image.symbol(kFinalBreakpointSymbol); fb && image.in_code(*fb)) bps.push_back(*fb);
        FullEventCounter counter;
        StopReason stop;
        {
          py::gil_scoped_release release;
          stop = machine.run_until(bps, budget, &counter);
        }
        py::dict d;
        d["stop"] = to_string(stop);
        d["cycles"] = machine.state().cycle;
        d["output"] = to_bytes(machine.output());
        d["windowed"] = counter.window_seen();
        d["events"] = events_dict(counter.window_seen() ? counter.windowed() : counter.total());
        return d;
      },
      py::arg("source") = py::none(), py::arg("benchmark") = py::none(), py::arg("budget") = 100'000'000,
      "Run a program unfaulted to HALT or __final_bp.");

  m.def("benchmark_source", [](const std::string& name) { return std::string(benchmark_source(name)); },
        py::arg("name"));

  m.def(
      "golden_run",
      [](const py::kwargs& kwargs) {
        const auto config = config_from_kwargs(kwargs);
        const auto spec = build_benchmark(config.benchmark);
        py::gil_scoped_release release;
        auto g = golden_run(spec, config);
        py::gil_scoped_acquire acquire;
        return golden_dict(g);
      },
      "Golden (fault-free) reference for a bundled benchmark; keywords as in the JSON config.");

  m.def(
      "run_campaign",
      [](const py::kwargs& kwargs) {
        const auto config = config_from_kwargs(kwargs);
        CampaignReport report;
        {
          py::gil_scoped_release release;
          report = run_campaign(config);
        }
        return campaign_dict(report);
      },
      "Run a campaign; keywords as in the JSON config (benchmark, location, num_faults, seed, events, ...).");

  m.def(
      "write_campaign",
      [](const std::filesystem::path& out_dir, const py::kwargs& kwargs) {
        const auto config = config_from_kwargs(kwargs);
        py::gil_scoped_release release;
        write_campaign_directory(run_campaign(config), out_dir);
      },
      py::arg("out_dir"), "Run a campaign and write manifest, faults, records, golden and timing files.");

  m.def(
      "analyze",
      [](const std::filesystem::path& dir, std::size_t bins) {
        const auto records = read_records_file(dir / "records.jsonl");
        const auto res = write_analysis(records, dir, bins);
        py::dict d;
        d["scatter_rows"] = res.scatter_rows;
        d["histogram_bins"] = res.histogram_bins;
        d["warnings"] = res.warnings;
        return d;
      },
      py::arg("dir"), py::arg("bins") = 20, "Write pca_scatter.csv, cycles_hist.csv and breakdown.csv.");

  m.def(
      "classify",
      [](const py::bytes& output, const py::bytes& golden_output, const std::string& stop) {
        GoldenReference g;
        g.output = from_bytes(golden_output);
        g.final_bp = 0;
        const auto o = classify(from_bytes(output), parse_stop(stop, g.final_bp), g);
        return py::make_tuple(std::string(outcome_name(o.cls)), std::string(reason_name(o.reason)));
      },
      py::arg("output"), py::arg("golden_output"), py::arg("stop") = "final",
      "Classify a run: stop is final, halted, budget or trap:<kind>.");

  m.def("required_repetitions", &required_repetitions, py::arg("num_events"), py::arg("num_slots"));

  m.def("z_normalize", [](const Array& a) { return to_array(z_normalize(to_matrix(a))); }, py::arg("matrix"));
  m.def("gaussianize", [](const Array& a) { return to_array(gaussianize(to_matrix(a))); }, py::arg("matrix"));
  m.def("inverse_normal_cdf", &inverse_normal_cdf, py::arg("p"));

  m.def(
      "pca",
      [](const Array& a, std::size_t k) {
        const auto res = pca(to_matrix(a), k);
        Matrix comps(res.components.size(), res.components.empty() ? 0 : res.components[0].size());
        for (std::size_t i = 0; i < res.components.size(); ++i)
          for (std::size_t c = 0; c < res.components[i].size(); ++c) comps(i, c) = res.components[i][c];
        py::dict d;
        d["components"] = to_array(comps);
        d["eigenvalues"] = res.eigenvalues;
        d["explained_variance_ratio"] = res.explained_variance_ratio;
        d["projections"] = to_array(res.projections);
        d["mean"] = res.mean;
        d["numerical_rank"] = res.numerical_rank;
        return d;
      },
      py::arg("matrix"), py::arg("k"));

  m.def(
      "histogram",
      [](const std::vector<double>& values, std::size_t bins) {
        const auto h = histogram(values, bins);
        return py::make_tuple(h.edges, h.counts);
      },
      py::arg("values"), py::arg("bins"));

  m.def(
      "summarize",
      [](const std::string& records_jsonl_text) {
        const auto records = parse_records_jsonl(records_jsonl_text);
        py::list rows;
        for (const auto& r : summarize(records).rows) {
          py::dict d;
          d["benchmark"] = r.benchmark;
          d["location"] = std::string(location_name(r.location));
          d["total"] = r.total;
          d["benign_pct"] = r.benign_pct;
          d["sdc_pct"] = r.sdc_pct;
          d["other_pct"] = r.other_pct;
          rows.append(d);
        }
        return rows;
      },
      py::arg("records_jsonl"), "Outcome breakdown of records in JSON Lines form.");
}
