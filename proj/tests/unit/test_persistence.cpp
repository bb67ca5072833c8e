#include <doctest.h>

#include "faultlab/campaign.hpp"
#include "faultlab/error.hpp"
#include "faultlab/persistence.hpp"

#include <json.hpp>

#include <filesystem>

using namespace faultlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("faultlab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("config json round trip") {
  const auto c = parse_config_json(R"J({"benchmark":"hash","location":"memory","num_faults":12,"seed":99,
    "events":"CYCLES,TRAPS","hpc_slots":1,"timeout_multiplier":4,"fault_model":"MBU(2)","trigger_sampling":"static"})J");
  CHECK(c.benchmark == "hash");
  CHECK(c.location == LocationClass::Memory);
  CHECK(c.num_faults == 12);
  CHECK(c.seed == 99);
  CHECK(c.events == std::vector<EventKind>{EventKind::Cycles, EventKind::Traps});
  CHECK(c.hpc_slots == 1);
  CHECK(c.mbu_bits == 2);
  CHECK(c.trigger_sampling == TriggerSampling::StaticCodeSpace);
  const auto again = parse_config_json(config_to_json(c));
  CHECK(again.events == c.events);
  CHECK(again.mbu_bits == 2);
  CHECK(again.timeout_multiplier == 4.0);
}

TEST_CASE("config json errors") {
  CHECK(code_of([] { parse_config_json(R"J({"bogus":1})J"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config_json(R"J({"events":"CYCLES,NOPE"})J"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config_json(R"J({"fault_model":"MBU(0)"})J"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_config_json("{not json"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("campaign directory round trip") {
  CampaignConfig c;
  c.benchmark = "dijkstra";
  c.location = LocationClass::ProgramCounter;
  c.num_faults = 30;
  c.seed = 5;
  const auto report = run_campaign(c);
  const auto dir = scratch("roundtrip");
  write_campaign_directory(report, dir);
  for (auto f : {"manifest.json", "faults.csv", "records.jsonl", "golden.json", "timing.json"})
    CHECK(fs::exists(dir / f));

  const auto records = read_records_file(dir / "records.jsonl");
  REQUIRE(records.size() == report.records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].fault == report.records[i].fault);
    CHECK(records[i].outcome == report.records[i].outcome);
    CHECK(records[i].events == report.records[i].events);
    CHECK(records[i].repetitions == report.records[i].repetitions);
    CHECK(records[i].injected == report.records[i].injected);
  }
  CHECK(records_jsonl(records) == read_text_file(dir / "records.jsonl"));

  const auto manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["version"] == std::string(kToolVersion));
  const auto from_manifest = config_from_manifest(read_text_file(dir / "manifest.json"));
  CHECK(from_manifest.seed == 5);
  CHECK(from_manifest.location == LocationClass::ProgramCounter);
  const auto rerun = run_campaign(from_manifest);
  CHECK(records_jsonl(rerun.records) == read_text_file(dir / "records.jsonl"));
  CHECK(faults_csv(rerun.faults) == read_text_file(dir / "faults.csv"));

  const auto csv = read_text_file(dir / "faults.csv");
  CHECK(csv.rfind("fault_id,location_class,target_index_or_address,bits,trigger\n", 0) == 0);
}

TEST_CASE("corrupt and missing records") {
  CHECK(code_of([] { parse_records_jsonl("{\"fault\":\n"); }) == ErrorCode::CorruptRecords);
  CHECK(code_of([] { read_records_file(scratch("missing") / "records.jsonl"); }) == ErrorCode::Io);
}

TEST_CASE("analysis outputs") {
  CampaignConfig c;
  c.num_faults = 60;
  const auto report = run_campaign(c);
  const auto dir = scratch("analysis");
  const auto files = write_analysis(report.records, dir, 8);
  std::size_t benign_sdc = 0;
  for (const auto& r : report.records) benign_sdc += r.outcome.cls != OutcomeClass::Other;
  CHECK(files.scatter_rows == benign_sdc);
  CHECK(files.histogram_bins == 8);
  const auto scatter = read_text_file(dir / "pca_scatter.csv");
  CHECK(scatter.rfind("fault_id,outcome,pc1,pc2\n", 0) == 0);
  CHECK(std::count(scatter.begin(), scatter.end(), '\n') == static_cast<long>(benign_sdc + 1));
  CHECK(read_text_file(dir / "cycles_hist.csv").rfind("bin_lo,bin_hi,count_benign,count_sdc\n", 0) == 0);
  CHECK(read_text_file(dir / "breakdown.csv").rfind("benchmark,location,benign_pct,sdc_pct,other_pct\n", 0) == 0);
  const auto& row = files.breakdown.rows.at(0);
  CHECK(std::abs(row.benign_pct + row.sdc_pct + row.other_pct - 100.0) <= 0.1);
}
