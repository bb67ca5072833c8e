#include "faultlab/persistence.hpp"

#include "faultlab/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

namespace faultlab {

using json = nlohmann::ordered_json;

std::string hex32(std::uint32_t value) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", value);
  return buf;
}

std::string hex64(std::uint64_t value) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llX", static_cast<unsigned long long>(value));
  return buf;
}

namespace {

std::uint64_t parse_hex(const std::string& s) {
  std::size_t pos = 0;
  const auto v = std::stoull(s, &pos, 16);
  if (pos != s.size()) throw std::invalid_argument("trailing characters in " + s);
  return v;
}

std::string target_string(const FaultTarget& t) {
  char buf[16];
  switch (t.location) {
    case LocationClass::Register: std::snprintf(buf, sizeof buf, "0x%X", t.reg); return buf;
    case LocationClass::ProgramCounter: return "-";
    case LocationClass::Memory: return hex32(t.address);
  }
  return "-";
}

std::string fault_model_string(unsigned bits) {
  return bits == 1 ? "SBU" : "MBU(" + std::to_string(bits) + ")";
}

unsigned parse_fault_model(const std::string& s) {
  if (s == "SBU") return 1;
  static const std::regex mbu(R"(MBU\((\d+)\))");
  std::smatch m;
  if (std::regex_match(s, m, mbu)) return static_cast<unsigned>(std::stoul(m[1].str()));
  throw Error(ErrorCode::InvalidConfig, "fault_model must be SBU or MBU(k), got '" + s + "'");
}

json events_json(const EventVector& v) {
  json out = json::object();
  for (auto kind : kEventCatalog)
    if (v.has(kind)) out[std::string(event_name(kind))] = v[kind];
  return out;
}

json event_list_json(std::span<const EventKind> events) {
  json out = json::array();
  for (auto e : events) out.push_back(std::string(event_name(e)));
  return out;
}

json config_json(const CampaignConfig& c) {
  json j;
  j["benchmark"] = c.benchmark;
  j["location"] = std::string(location_name(c.location));
  j["num_faults"] = c.num_faults;
  j["seed"] = c.seed;
  j["events"] = event_list_json(c.events);
  j["hpc_slots"] = c.hpc_slots;
  j["timeout_multiplier"] = c.timeout_multiplier;
  j["fault_model"] = fault_model_string(c.mbu_bits);
  j["trigger_sampling"] = std::string(trigger_sampling_name(c.trigger_sampling));
  return j;
}

CampaignConfig config_from(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  CampaignConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "benchmark") {
        c.benchmark = value.get<std::string>();
      } else if (key == "location") {
        auto loc = location_from_name(value.get<std::string>());
        if (!loc) throw Error(ErrorCode::InvalidConfig, "location must be registers, pc or memory");
        c.location = *loc;
      } else if (key == "num_faults") {
        c.num_faults = value.get<std::uint32_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "events") {
        if (value.is_string()) {
          c.events = parse_event_list(value.get<std::string>());
        } else {
          std::string csv;
          for (const auto& e : value) csv += e.get<std::string>() + ",";
          c.events = parse_event_list(csv);
        }
      } else if (key == "hpc_slots") {
        c.hpc_slots = value.get<unsigned>();
      } else if (key == "timeout_multiplier") {
        c.timeout_multiplier = value.get<double>();
      } else if (key == "fault_model") {
        c.mbu_bits = parse_fault_model(value.get<std::string>());
      } else if (key == "trigger_sampling") {
        auto mode = trigger_sampling_from_name(value.get<std::string>());
        if (!mode) throw Error(ErrorCode::InvalidConfig, "trigger_sampling must be dynamic or static");
        c.trigger_sampling = *mode;
      } else if (key == "jobs") {
        c.jobs = value.get<unsigned>();
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  c.validate();
  return c;
}

json record_to(const CampaignRecord& r) {
  json j;
  j["fault_id"] = r.fault.id;
  j["benchmark"] = r.fault.benchmark;
  j["location"] = std::string(location_name(r.fault.target.location));
  j["target"] = target_string(r.fault.target);
  j["bits"] = r.fault.target.bits;
  j["trigger"] = hex32(r.fault.trigger);
  j["injected"] = r.injected;
  j["outcome"] = std::string(outcome_name(r.outcome.cls));
  if (r.outcome.reason == OutcomeReason::None)
    j["reason"] = nullptr;
  else
    j["reason"] = std::string(reason_name(r.outcome.reason));
  j["events_complete"] = r.events_complete;
  j["events"] = events_json(r.events);
  json reps = json::array();
  for (const auto& rep : r.repetitions) {
    json x;
    x["slots"] = event_list_json(rep.slots);
    x["stop"] = to_string(rep.stop);
    x["cycles"] = rep.cycles;
    x["output_digest"] = hex64(rep.output_digest);
    reps.push_back(std::move(x));
  }
  j["repetitions"] = std::move(reps);
  j["output_digest"] = hex64(r.output_digest);
  j["wall_ms"] = r.wall_ms;
  return j;
}

StopReason parse_stop(const std::string& s) {
  if (s == "halted") return StopReason::halted();
  if (s == "budget") return StopReason::budget_exceeded();
  if (s.rfind("breakpoint@", 0) == 0) return StopReason::breakpoint(static_cast<Address>(parse_hex(s.substr(11))));
  if (s.rfind("trap:", 0) == 0) {
    const auto name = s.substr(5);
    for (auto t : {TrapKind::IllegalOpcode, TrapKind::FetchOutOfBounds, TrapKind::MemOutOfBounds,
                   TrapKind::MisalignedAccess})
      if (trap_name(t) == name) return StopReason::trapped(t);
  }
  throw std::invalid_argument("bad stop reason '" + s + "'");
}

CampaignRecord record_from(const json& j) {
  CampaignRecord r;
  r.fault.id = j.at("fault_id").get<std::uint32_t>();
  r.fault.benchmark = j.at("benchmark").get<std::string>();
  auto loc = location_from_name(j.at("location").get<std::string>());
  if (!loc) throw std::invalid_argument("bad location");
  r.fault.target.location = *loc;
  const auto target = j.at("target").get<std::string>();
  if (*loc == LocationClass::Register) r.fault.target.reg = static_cast<unsigned>(parse_hex(target));
  if (*loc == LocationClass::Memory) r.fault.target.address = static_cast<Address>(parse_hex(target));
  r.fault.target.bits = j.at("bits").get<std::vector<std::uint8_t>>();
  r.fault.trigger = static_cast<Address>(parse_hex(j.at("trigger").get<std::string>()));
  r.injected = j.at("injected").get<bool>();
  auto cls = outcome_from_name(j.at("outcome").get<std::string>());
  if (!cls) throw std::invalid_argument("bad outcome");
  r.outcome.cls = *cls;
  const auto& reason = j.at("reason");
  if (!reason.is_null()) {
    auto rr = reason_from_name(reason.get<std::string>());
    if (!rr) throw std::invalid_argument("bad reason");
    r.outcome.reason = *rr;
  }
  r.events_complete = j.at("events_complete").get<bool>();
  for (const auto& [name, value] : j.at("events").items()) {
    auto kind = event_from_name(name);
    if (!kind) throw std::invalid_argument("unknown event " + name);
    r.events.set(*kind, value.get<std::uint64_t>());
  }
  for (const auto& x : j.at("repetitions")) {
    RepetitionSummary rep;
    for (const auto& s : x.at("slots")) {
      auto kind = event_from_name(s.get<std::string>());
      if (!kind) throw std::invalid_argument("unknown event in slots");
      rep.slots.push_back(*kind);
    }
    rep.stop = parse_stop(x.at("stop").get<std::string>());
    rep.cycles = x.at("cycles").get<std::uint64_t>();
    rep.output_digest = parse_hex(x.at("output_digest").get<std::string>());
    r.repetitions.push_back(std::move(rep));
  }
  r.output_digest = parse_hex(j.at("output_digest").get<std::string>());
  r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

}  // namespace

CampaignConfig parse_config_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from(j);
}

std::string config_to_json(const CampaignConfig& config) { return config_json(config).dump(2) + "\n"; }

std::string manifest_json(const CampaignReport& report) {
  json j;
  j["tool"] = std::string(kToolName);
  j["version"] = std::string(kToolVersion);
  j["config"] = config_json(report.config);
  j["seed"] = report.config.seed;
  json catalog = json::array();
  for (auto kind : kEventCatalog)
    catalog.push_back({{"id", event_index(kind)}, {"name", std::string(event_name(kind))}});
  j["event_catalog"] = std::move(catalog);
  json rotation = json::array();
  for (const auto& group : report.rotation) rotation.push_back(event_list_json(group));
  j["slot_rotation"] = std::move(rotation);
  j["repetitions_per_fault"] = report.rotation.size();
  j["golden"] = {{"output_digest", hex64(report.golden.output_digest)},
                 {"cycles", report.golden.golden_cycles},
                 {"executions", report.golden.executions},
                 {"final_bp", hex32(report.golden.final_bp)},
                 {"trace_size", report.golden.dynamic_trace.size()}};
  j["num_faults"] = report.records.size();
  j["faulty_executions"] = report.faulty_executions;
  j["target_clock_hz"] = kTargetClockHz;
  return j.dump(2) + "\n";
}

std::string golden_json(const GoldenReference& golden) {
  json j;
  j["benchmark"] = golden.benchmark;
  j["output_digest"] = hex64(golden.output_digest);
  std::string hex;
  char buf[4];
  for (auto b : golden.output) {
    std::snprintf(buf, sizeof buf, "%02x", b);
    hex += buf;
  }
  j["output_hex"] = hex;
  j["cycles"] = golden.golden_cycles;
  j["events"] = events_json(golden.events);
  j["final_bp"] = hex32(golden.final_bp);
  json trace = json::array();
  for (auto a : golden.dynamic_trace) trace.push_back(hex32(a));
  j["dynamic_trace"] = std::move(trace);
  return j.dump(2) + "\n";
}

std::string faults_csv(std::span<const Fault> faults) {
  std::ostringstream os;
  os << "fault_id,location_class,target_index_or_address,bits,trigger\n";
  for (const auto& f : faults) {
    os << f.id << ',' << location_name(f.target.location) << ',' << target_string(f.target) << ',';
    for (std::size_t i = 0; i < f.target.bits.size(); ++i) os << (i ? ";" : "") << unsigned{f.target.bits[i]};
    os << ',' << hex32(f.trigger) << '\n';
  }
  return os.str();
}

std::string record_json(const CampaignRecord& record) { return record_to(record).dump(); }

std::string records_jsonl(std::span<const CampaignRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_json(r);
    out += '\n';
  }
  return out;
}

std::string timing_json(const CampaignReport& report) {
  json j;
  j["host_total_ms"] = report.host_total_ms;
  double sum = 0.0;
  for (double ms : report.host_ms) sum += ms;
  j["mean_fault_ms"] = report.host_ms.empty() ? 0.0 : sum / static_cast<double>(report.host_ms.size());
  j["mean_execution_ms"] =
      report.faulty_executions == 0 ? 0.0 : sum / static_cast<double>(report.faulty_executions);
  j["jobs"] = report.config.jobs;
  return j.dump(2) + "\n";
}

std::vector<CampaignRecord> parse_records_jsonl(std::string_view text) {
  std::vector<CampaignRecord> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(record_from(json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::CorruptRecords, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

CampaignConfig config_from_manifest(std::string_view manifest_text) {
  try {
    return config_from(json::parse(manifest_text).at("config"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptRecords, std::string("manifest: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void write_campaign_directory(const CampaignReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "manifest.json", manifest_json(report));
  write_text_file(dir / "faults.csv", faults_csv(report.faults));
  write_text_file(dir / "records.jsonl", records_jsonl(report.records));
  write_text_file(dir / "golden.json", golden_json(report.golden));
  write_text_file(dir / "timing.json", timing_json(report));
}

std::vector<CampaignRecord> read_records_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, path.string() + " not found");
  return parse_records_jsonl(read_text_file(path));
}

AnalysisFiles write_analysis(std::span<const CampaignRecord> records, const std::filesystem::path& dir,
                             std::size_t num_bins) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to analyze");
  AnalysisFiles res;
  res.breakdown = summarize(records);

  const auto fm = build_feature_matrix(records);
  std::ostringstream scatter, hist;
  scatter << "fault_id,outcome,pc1,pc2\n";
  hist << "bin_lo,bin_hi,count_benign,count_sdc\n";
  scatter.precision(17);
  hist.precision(17);

  if (fm.values.rows() >= 2 && fm.values.cols() > 0) {
    std::vector<std::size_t> constant;
    const Matrix pre = gaussianize(z_normalize(fm.values, &constant));
    for (auto c : constant)
      res.warnings.push_back("constant feature " + std::string(event_name(fm.columns[c])) + " mapped to zero");

    // Two components when the covariance supports them, fewer otherwise.
    std::size_t k = std::min<std::size_t>(2, pre.cols());
    PcaResult result;
    while (true) {
      try {
        result = pca(pre, k);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateCovariance || k == 0) throw;
        --k;
      }
    }
    if (k < 2) res.warnings.push_back("feature covariance has rank " + std::to_string(k) + "; missing components written as 0");
    for (std::size_t r = 0; r < pre.rows(); ++r) {
      const double pc1 = k > 0 ? result.projections(r, 0) : 0.0;
      const double pc2 = k > 1 ? result.projections(r, 1) : 0.0;
      scatter << fm.fault_ids[r] << ',' << outcome_name(fm.labels[r]) << ',' << pc1 << ',' << pc2 << '\n';
    }
    res.scatter_rows = pre.rows();

    auto cyc = std::find(fm.columns.begin(), fm.columns.end(), EventKind::Cycles);
    if (cyc != fm.columns.end()) {
      const auto col = pre.column(static_cast<std::size_t>(cyc - fm.columns.begin()));
      const auto h = histogram(col, num_bins);
      std::vector<std::uint64_t> benign(num_bins, 0), sdc(num_bins, 0);
      for (std::size_t r = 0; r < col.size(); ++r)
        ++(fm.labels[r] == OutcomeClass::Benign ? benign : sdc)[h.bin_of(col[r])];
      for (std::size_t b = 0; b < num_bins; ++b)
        hist << h.edges[b] << ',' << h.edges[b + 1] << ',' << benign[b] << ',' << sdc[b] << '\n';
      res.histogram_bins = num_bins;
    } else {
      res.warnings.push_back("CYCLES was not tracked; cycles_hist.csv left empty");
    }
  } else {
    res.warnings.push_back("fewer than 2 Benign/SDC records with complete events; PCA and histogram skipped");
  }

  std::ostringstream breakdown;
  breakdown << "benchmark,location,benign_pct,sdc_pct,other_pct\n";
  char buf[64];
  for (const auto& row : res.breakdown.rows) {
    std::snprintf(buf, sizeof buf, "%.1f,%.1f,%.1f", row.benign_pct, row.sdc_pct, row.other_pct);
    breakdown << row.benchmark << ',' << location_name(row.location) << ',' << buf << '\n';
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string());
  write_text_file(dir / "pca_scatter.csv", scatter.str());
  write_text_file(dir / "cycles_hist.csv", hist.str());
  write_text_file(dir / "breakdown.csv", breakdown.str());
  return res;
}

}  // namespace faultlab
