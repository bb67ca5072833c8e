#pragma once

#include "faultlab/analysis.hpp"
#include "faultlab/campaign.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace faultlab {

inline constexpr std::string_view kToolName = "faultlab";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Parses a campaign config. Missing fields keep their defaults. Throws
/// InvalidConfig (bad values, unknown keys) or CorruptRecords (bad JSON).
CampaignConfig parse_config_json(std::string_view text);
std::string config_to_json(const CampaignConfig& config);

/// manifest.json: config echo, seed, event catalog ids, slot rotation, golden
/// digest and tool version. Contains nothing host-dependent.
std::string manifest_json(const CampaignReport& report);
std::string golden_json(const GoldenReference& golden);
/// faults.csv: fault_id,location_class,target_index_or_address,bits,trigger
std::string faults_csv(std::span<const Fault> faults);
/// One JSON object per line, ordered by fault id.
std::string records_jsonl(std::span<const CampaignRecord> records);
std::string record_json(const CampaignRecord& record);
/// timing.json: host wall-clock figures (excluded from determinism).
std::string timing_json(const CampaignReport& report);

/// Throws CorruptRecords with the offending line number.
std::vector<CampaignRecord> parse_records_jsonl(std::string_view text);

/// Reads the config back out of a manifest.
CampaignConfig config_from_manifest(std::string_view manifest_text);

/// Writes manifest.json, faults.csv, records.jsonl, golden.json, timing.json.
/// Throws Io.
void write_campaign_directory(const CampaignReport& report, const std::filesystem::path& dir);

/// Throws Io when missing, CorruptRecords when malformed.
std::vector<CampaignRecord> read_records_file(const std::filesystem::path& path);

struct AnalysisFiles {
  std::size_t scatter_rows = 0;
  std::size_t histogram_bins = 0;
  BreakdownReport breakdown;
  std::vector<std::string> warnings;
};

/// pca_scatter.csv (fault_id,outcome,pc1,pc2), cycles_hist.csv
/// (bin_lo,bin_hi,count_benign,count_sdc) over the preprocessed CYCLES
/// feature, breakdown.csv (benchmark,location,benign_pct,sdc_pct,other_pct).
/// Throws EmptyInput for no records, Io on write failure.
AnalysisFiles write_analysis(std::span<const CampaignRecord> records, const std::filesystem::path& dir,
                             std::size_t num_bins = 20);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string hex32(std::uint32_t value);
std::string hex64(std::uint64_t value);

}  // namespace faultlab
