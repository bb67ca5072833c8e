#include "cli.hpp"

#include "faultlab/faultlab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace faultlab::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::GoldenTrapped:
    case ErrorCode::GoldenTimeout: return kGoldenFailure;
    case ErrorCode::Io:
    case ErrorCode::CorruptRecords: return kIoError;
    default: return kUsage;
  }
}

struct Printer {
  std::ostream& out;

  template <typename... Args>
  void line(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out << buf << '\n';
  }
};

// ---- asm -------------------------------------------------------------------

struct AsmOptions {
  std::string source;
  std::string output;
};

int cmd_asm(const AsmOptions& opt, std::ostream& out) {
  const auto image = assemble(read_text_file(opt.source));
  Printer p{out};
  std::map<Address, std::vector<std::string>> labels;
  for (const auto& [name, addr] : image.symbols) labels[addr].push_back(name);
  for (std::size_t i = 0; i < image.code.size(); ++i) {
    const Address a = image.code_base + static_cast<Address>(i * 4);
    if (auto it = labels.find(a); it != labels.end())
      for (const auto& name : it->second) p.line("%s:", name.c_str());
    p.line("  %08X  %08X  %s", a, image.code[i], disassemble(image.code[i], a).c_str());
  }
  p.line("entry     %s", hex32(image.entry).c_str());
  for (const auto& r : image.footprint) p.line("footprint %s +%u", hex32(r.start).c_str(), r.length);
  p.line("symbols   %zu", image.symbols.size());
  for (const auto& [name, addr] : image.symbols) p.line("  %-20s %s", name.c_str(), hex32(addr).c_str());

  if (!opt.output.empty()) {
    // Flat memory image from address 0 to the end of the footprint.
    std::string bytes(image.footprint_end(), '\0');
    for (std::size_t i = 0; i < image.code.size(); ++i)
      for (int b = 0; b < 4; ++b) bytes[image.code_base + i * 4 + b] = static_cast<char>(image.code[i] >> (8 * b));
    for (std::size_t i = 0; i < image.data.size(); ++i) bytes[image.data_base + i] = static_cast<char>(image.data[i]);
    write_text_file(opt.output, bytes);
    p.line("wrote %zu bytes to %s", bytes.size(), opt.output.c_str());
  }
  return kSuccess;
}

// ---- run -------------------------------------------------------------------

struct RunOptions {
  std::string source;
  std::string benchmark;
  std::uint64_t budget = 100'000'000;
  std::size_t mem_size = kDefaultMemSize;
};

int cmd_run(const RunOptions& opt, std::ostream& out) {
  std::string source = opt.benchmark.empty() ? read_text_file(opt.source) : std::string(benchmark_source(opt.benchmark));
  const auto image = assemble(source);
  Machine machine(image, opt.mem_size);
  std::vector<Address> bps;
  if (auto fb = image.symbol(kFinalBreakpointSymbol); fb && image.in_code(*fb)) bps.push_back(*fb);

  FullEventCounter counter;
  const auto stop = machine.run_until(bps, opt.budget, &counter);
  Printer p{out};
  p.line("stop      %s", to_string(stop).c_str());
  p.line("cycles    %llu", static_cast<unsigned long long>(machine.state().cycle));
  const auto output = machine.output();
  p.line("output    %zu bytes", output.size());
  std::string words;
  for (std::size_t i = 0; i + 3 < output.size(); i += 4) {
    const Word w = Word{output[i]} | (Word{output[i + 1]} << 8) | (Word{output[i + 2]} << 16) |
                   (Word{output[i + 3]} << 24);
    words += hex32(w) + ((i / 4) % 8 == 7 ? "\n" : " ");
  }
  if (!words.empty()) out << words << (words.back() == '\n' ? "" : "\n");
  const bool windowed = counter.window_seen();
  const auto events = windowed ? counter.windowed() : counter.total();
  p.line("events    (%s)", windowed ? "PMU window" : "whole run");
  for (auto kind : kEventCatalog)
    p.line("  %-14s %llu", std::string(event_name(kind)).c_str(), static_cast<unsigned long long>(events[kind]));

  const bool clean = stop.kind == StopReason::Kind::Halted ||
                     (stop.kind == StopReason::Kind::Breakpoint && !bps.empty() && stop.address == bps.front());
  return clean ? kSuccess : kUsage;
}

// ---- campaign --------------------------------------------------------------

struct CampaignOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::string> benchmark;
  std::optional<std::string> location;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> faults;
  std::optional<std::string> events;
  std::optional<unsigned> hpc;
  std::optional<double> timeout_mult;
  std::optional<unsigned> jobs;
  std::optional<std::string> trigger_mode;
  std::optional<std::string> fault_model;
  bool grid = false;
};

CampaignConfig resolve_config(const CampaignOptions& opt) {
  CampaignConfig c;
  if (!opt.config_path.empty()) c = parse_config_json(read_text_file(opt.config_path));
  if (opt.benchmark) c.benchmark = *opt.benchmark;
  if (opt.location) {
    auto loc = location_from_name(*opt.location);
    if (!loc) throw Error(ErrorCode::InvalidConfig, "--location must be registers, pc or memory");
    c.location = *loc;
  }
  if (opt.seed) c.seed = *opt.seed;
  if (opt.faults) c.num_faults = *opt.faults;
  if (opt.events) c.events = parse_event_list(*opt.events);
  if (opt.hpc) c.hpc_slots = *opt.hpc;
  if (opt.timeout_mult) c.timeout_multiplier = *opt.timeout_mult;
  if (opt.jobs) c.jobs = *opt.jobs;
  if (opt.trigger_mode) {
    auto mode = trigger_sampling_from_name(*opt.trigger_mode);
    if (!mode) throw Error(ErrorCode::InvalidConfig, "--trigger-mode must be dynamic or static");
    c.trigger_sampling = *mode;
  }
  if (opt.fault_model) {
    // Reuse the JSON parser's fault-model grammar.
    c.mbu_bits = parse_config_json("{\"fault_model\":\"" + *opt.fault_model + "\"}").mbu_bits;
  }
  c.validate();
  bool known = false;
  for (auto name : kBenchmarkNames) known = known || name == c.benchmark;
  if (!known) throw Error(ErrorCode::UnknownBenchmark, "'" + c.benchmark + "' (expected qsort, dijkstra or hash)");
  return c;
}

struct SummaryRow {
  std::string benchmark;
  std::string location;
  std::size_t faults = 0;
  double exec_ms = 0.0;
  double emulated_ms = 0.0;
  double benign = 0, sdc = 0, other = 0;
};

void print_table(std::ostream& out, const std::vector<SummaryRow>& rows) {
  Printer p{out};
  p.line("%-9s %-10s %7s %12s %12s %8s %8s %8s", "Benchmark", "Location", "Faults", "Inj.Time(ms)",
         "Target(ms)", "Benign%", "SDC%", "Other%");
  for (const auto& r : rows)
    p.line("%-9s %-10s %7zu %12.3f %12.4f %8.1f %8.1f %8.1f", r.benchmark.c_str(), r.location.c_str(), r.faults,
           r.exec_ms, r.emulated_ms, r.benign, r.sdc, r.other);
}

SummaryRow summarize_report(const CampaignReport& report) {
  SummaryRow row;
  row.benchmark = report.config.benchmark;
  row.location = std::string(location_name(report.config.location));
  row.faults = report.records.size();
  double host = 0.0, target = 0.0;
  for (double ms : report.host_ms) host += ms;
  for (const auto& r : report.records) target += r.wall_ms;
  row.exec_ms = report.faulty_executions ? host / static_cast<double>(report.faulty_executions) : 0.0;
  row.emulated_ms = report.faulty_executions ? target / static_cast<double>(report.faulty_executions) : 0.0;
  const auto b = summarize(report.records);
  row.benign = b.rows.front().benign_pct;
  row.sdc = b.rows.front().sdc_pct;
  row.other = b.rows.front().other_pct;
  return row;
}

int cmd_campaign(const CampaignOptions& opt, std::ostream& out) {
  const auto base = resolve_config(opt);
  std::vector<std::pair<CampaignConfig, fs::path>> plan;
  if (opt.grid) {
    for (auto bench : kBenchmarkNames)
      for (auto loc : {LocationClass::Memory, LocationClass::Register, LocationClass::ProgramCounter}) {
        CampaignConfig c = base;
        c.benchmark = std::string(bench);
        c.location = loc;
        plan.emplace_back(c, fs::path(opt.out_dir) / (c.benchmark + "-" + std::string(location_name(loc))));
      }
  } else {
    plan.emplace_back(base, fs::path(opt.out_dir));
  }

  std::vector<SummaryRow> rows;
  for (const auto& [config, dir] : plan) {
    const auto report = run_campaign(config);
    write_campaign_directory(report, dir);
    rows.push_back(summarize_report(report));
    out << "wrote " << dir.string() << " (" << report.records.size() << " faults, "
        << report.faulty_executions << " faulty + " << report.golden.executions << " golden executions)\n";
  }
  print_table(out, rows);
  return kSuccess;
}

// ---- analyze / report ------------------------------------------------------

std::vector<fs::path> campaign_dirs(const fs::path& root) {
  if (fs::exists(root / "records.jsonl")) return {root};
  std::vector<fs::path> dirs;
  if (fs::is_directory(root))
    for (const auto& entry : fs::directory_iterator(root))
      if (entry.is_directory() && fs::exists(entry.path() / "records.jsonl")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw Error(ErrorCode::Io, "no records.jsonl under " + root.string());
  return dirs;
}

int cmd_analyze(const std::string& dir, std::size_t bins, std::ostream& out, std::ostream& err) {
  const auto dirs = campaign_dirs(dir);
  std::vector<CampaignRecord> all;
  for (const auto& d : dirs) {
    auto records = read_records_file(d / "records.jsonl");
    if (records.empty()) throw Error(ErrorCode::CorruptRecords, (d / "records.jsonl").string() + " has no records");
    const auto res = write_analysis(records, d, bins);
    for (const auto& w : res.warnings) err << "warning: " << d.filename().string() << ": " << w << '\n';
    out << d.string() << ": " << res.scatter_rows << " scatter rows, " << res.histogram_bins << " histogram bins\n";
    all.insert(all.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  const auto breakdown = summarize(all);
  if (dirs.size() > 1 || dirs.front() != fs::path(dir)) {
    // Grid root: one combined breakdown covering every campaign.
    std::string csv = "benchmark,location,benign_pct,sdc_pct,other_pct\n";
    char buf[64];
    for (const auto& row : breakdown.rows) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f,%.1f", row.benign_pct, row.sdc_pct, row.other_pct);
      csv += row.benchmark + "," + std::string(location_name(row.location)) + "," + buf + "\n";
    }
    write_text_file(fs::path(dir) / "breakdown.csv", csv);
  }
  Printer p{out};
  p.line("%-9s %-10s %7s %8s %8s %8s %14s %14s", "Benchmark", "Location", "Faults", "Benign%", "SDC%", "Other%",
         "Benign cyc(sd)", "SDC cyc(sd)");
  for (const auto& r : breakdown.rows)
    p.line("%-9s %-10s %7llu %8.1f %8.1f %8.1f %14.1f %14.1f", r.benchmark.c_str(),
           std::string(location_name(r.location)).c_str(), static_cast<unsigned long long>(r.total), r.benign_pct,
           r.sdc_pct, r.other_pct, r.benign_cycles.stddev, r.sdc_cycles.stddev);
  return kSuccess;
}

int cmd_report(const std::string& dir, std::ostream& out) {
  std::vector<SummaryRow> rows;
  for (const auto& d : campaign_dirs(dir)) {
    const auto config = config_from_manifest(read_text_file(d / "manifest.json"));
    const auto records = read_records_file(d / "records.jsonl");
    if (records.empty()) throw Error(ErrorCode::CorruptRecords, (d / "records.jsonl").string() + " has no records");
    SummaryRow row;
    row.benchmark = config.benchmark;
    row.location = std::string(location_name(config.location));
    row.faults = records.size();
    std::size_t executions = 0;
    double target = 0.0;
    for (const auto& r : records) {
      executions += r.repetitions.size();
      target += r.wall_ms;
    }
    row.emulated_ms = executions ? target / static_cast<double>(executions) : 0.0;
    if (fs::exists(d / "timing.json")) {
      try {
        row.exec_ms = nlohmann::json::parse(read_text_file(d / "timing.json")).value("mean_execution_ms", 0.0);
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::CorruptRecords, (d / "timing.json").string() + " is not valid JSON");
      }
    }
    const auto b = summarize(records);
    row.benign = b.rows.front().benign_pct;
    row.sdc = b.rows.front().sdc_pct;
    row.other = b.rows.front().other_pct;
    rows.push_back(row);
  }
  print_table(out, rows);
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"faultlab: debugger-driven soft-error injection on an emulated target"};
  app.require_subcommand(1);

  AsmOptions asm_opt;
  auto* asm_cmd = app.add_subcommand("asm", "Assemble a source file and print its listing");
  asm_cmd->add_option("source", asm_opt.source, "Assembly source")->required();
  asm_cmd->add_option("-o,--output", asm_opt.output, "Write a flat memory image");

  RunOptions run_opt;
  auto* run_cmd = app.add_subcommand("run", "Run a program unfaulted and dump output, cycles and events");
  run_cmd->add_option("source", run_opt.source, "Assembly source");
  run_cmd->add_option("--benchmark", run_opt.benchmark, "Run a bundled benchmark instead of a file");
  run_cmd->add_option("--budget", run_opt.budget, "Cycle budget");
  run_cmd->add_option("--mem-size", run_opt.mem_size, "Memory size in bytes");

  CampaignOptions camp;
  auto* camp_cmd = app.add_subcommand("campaign", "Run a fault-injection campaign");
  camp_cmd->add_option("config", camp.config_path, "Campaign config (JSON)");
  camp_cmd->add_option("-o,--out", camp.out_dir, "Output directory")->required();
  camp_cmd->add_option("--benchmark", camp.benchmark, "qsort, dijkstra or hash");
  camp_cmd->add_option("--location", camp.location, "registers, pc or memory");
  camp_cmd->add_option("--seed", camp.seed, "PRNG seed");
  camp_cmd->add_option("--faults", camp.faults, "Number of faults");
  camp_cmd->add_option("--events", camp.events, "Comma separated event names");
  camp_cmd->add_option("--hpc", camp.hpc, "Hardware counter slots");
  camp_cmd->add_option("--timeout-mult", camp.timeout_mult, "Timeout as a multiple of golden cycles");
  camp_cmd->add_option("--jobs", camp.jobs, "Worker threads");
  camp_cmd->add_option("--trigger-mode", camp.trigger_mode, "dynamic or static");
  camp_cmd->add_option("--fault-model", camp.fault_model, "SBU or MBU(k)");
  camp_cmd->add_flag("--grid", camp.grid, "Run all 9 benchmark x location campaigns");

  std::string analyze_dir;
  std::size_t bins = 20;
  auto* an_cmd = app.add_subcommand("analyze", "Write PCA scatter, cycle histogram and breakdown CSVs");
  an_cmd->add_option("dir", analyze_dir, "Campaign directory (or grid root)")->required();
  an_cmd->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);

  std::string report_dir;
  auto* rep_cmd = app.add_subcommand("report", "Print a per-campaign summary table");
  rep_cmd->add_option("dir", report_dir, "Campaign directory (or grid root)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*asm_cmd) return cmd_asm(asm_opt, out);
    if (*run_cmd) {
      if (run_opt.source.empty() == run_opt.benchmark.empty()) {
        err << "run: give either a source file or --benchmark\n";
        return kUsage;
      }
      return cmd_run(run_opt, out);
    }
    if (*camp_cmd) return cmd_campaign(camp, out);
    if (*an_cmd) return cmd_analyze(analyze_dir, bins, out, err);
    if (*rep_cmd) return cmd_report(report_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace faultlab::cli
