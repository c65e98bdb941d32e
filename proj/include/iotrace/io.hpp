#pragma once

// File formats: SimConfig JSON, record JSONL, disclosure / published-list /
// report JSON, eavesdrop JSONL, and the output-directory writer. Parsers
// throw ConfigError with the offending path / line number.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "iotrace/metrics.hpp"
#include "iotrace/sim.hpp"

namespace iotrace {

SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& config);
SimConfig load_config(const std::filesystem::path& path);

// {"totem":"T-0001","slot":12345,"beacon":"<hex32>"} per line.
std::string record_to_jsonl_line(const BeaconRecord& r);
BeaconRecord record_from_jsonl_line(const std::string& line, std::size_t line_no);
std::vector<BeaconRecord> load_records_jsonl(const std::filesystem::path& path);

// JSON array of {"slot": u64, "beacon": hex32}.
nlohmann::json disclosure_to_json(const PositiveDisclosure& d);
PositiveDisclosure disclosure_from_json(const nlohmann::json& j);
PositiveDisclosure load_disclosure(const std::filesystem::path& path);

PublishedList published_from_json(const nlohmann::json& j);
PublishedList load_published(const std::filesystem::path& path);

nlohmann::json report_to_json(const ExposureReport& r);

// {"payload":"<hex>","t":seconds,"x":m,"y":m} per line.
std::string eavesdrop_to_jsonl_line(const EavesdropEntry& e);
EavesdropEntry eavesdrop_from_jsonl_line(const std::string& line, std::size_t line_no);
EavesdropLog load_eavesdrop_jsonl(const std::filesystem::path& path);

nlohmann::json attack_report_to_json(const std::vector<TargetInference>& inferences,
                                     const std::vector<TrajectoryPoint>& trajectory);

nlohmann::json metrics_to_json(const SimOutput& output);
std::string k_histogram_csv(const KAnonymityProfile& profile);

// Writes the full artifact set (records.jsonl, published_N.json, reports,
// eavesdrop.jsonl, ground_truth.json, fraud_flags.json, run_report.json,
// metrics.json, metrics_k_hist.csv, config_echo.json) into `dir`.
void write_outputs(const SimOutput& output, const std::filesystem::path& dir);

}  // namespace iotrace
