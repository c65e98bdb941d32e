// iotrace CLI: run simulations, execute individual protocol steps on files,
// and run the attacks offline. Exit codes: 0 success, 1 internal error,
// 2 input/config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "iotrace/authority.hpp"
#include "iotrace/hex.hpp"
#include "iotrace/io.hpp"
#include "iotrace/metrics.hpp"
#include "iotrace/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInternalError = 1;
constexpr int kInputError = 2;

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string mode;
  bool overwrite = false;
  std::string sweep;
};

void prepare_out_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir) && !fs::is_empty(dir) && !overwrite) {
    throw iotrace::ConfigError("output directory " + dir.string() +
                               " is not empty (use --overwrite)");
  }
  fs::create_directories(dir);
}

int run_simulate(const SimulateArgs& args) {
  iotrace::SimConfig config = iotrace::load_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (!args.mode.empty()) {
    auto mode = iotrace::mode_from_string(args.mode);
    if (!mode) throw iotrace::ConfigError("--mode: expected centralized | decentralized | privacy_enhanced");
    config.mode = *mode;
  }

  if (!args.sweep.empty()) {
    std::string range = args.sweep;
    if (range.rfind("seeds=", 0) == 0) range = range.substr(6);
    const auto sep = range.find("..");
    if (sep == std::string::npos) {
      throw iotrace::ConfigError("--sweep: expected seeds=<first>..<last>, e.g. seeds=0..31");
    }
    std::uint64_t first = 0, last = 0;
    try {
      first = std::stoull(range.substr(0, sep));
      last = std::stoull(range.substr(sep + 2));
    } catch (const std::exception&) {
      throw iotrace::ConfigError("--sweep: expected seeds=<first>..<last>, e.g. seeds=0..31");
    }
    if (last < first) throw iotrace::ConfigError("--sweep: last seed below first");
    prepare_out_dir(args.out_dir, args.overwrite);

    // independent runs, one thread each, bounded by hardware concurrency
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                       last - first + 1));
    std::vector<std::thread> pool;
    std::atomic<std::uint64_t> next{first};
    std::atomic<bool> failed{false};
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::uint64_t s = next.fetch_add(1);
          if (s > last || failed.load()) break;
          try {
            iotrace::SimConfig run_config = config;
            run_config.seed = s;
            const iotrace::SimOutput output = iotrace::run(run_config);
            iotrace::write_outputs(output, fs::path(args.out_dir) / std::to_string(s));
          } catch (...) {
            failed.store(true);
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("sweep: a run failed");
    return kOk;
  }

  prepare_out_dir(args.out_dir, args.overwrite);
  const iotrace::SimOutput output = iotrace::run(config);
  iotrace::write_outputs(output, args.out_dir);
  return kOk;
}

int run_reconcile(const std::string& records_path, const std::string& positives_path,
                  std::uint32_t epsilon, std::uint64_t seed, const std::string& out_path) {
  iotrace::AuthorityStore store;
  iotrace::ingest_records(store, iotrace::load_records_jsonl(records_path));
  const iotrace::PositiveDisclosure d = iotrace::load_disclosure(positives_path);
  if (d.empty()) throw iotrace::ConfigError("positives file is empty");
  const iotrace::PublishedList list =
      iotrace::reconcile_centralized(store, d, epsilon, {}, /*published_at_s=*/0);
  write_text(out_path, iotrace::publish(list, seed));
  return kOk;
}

int run_detect_fraud(const std::string& records_path, const std::string& totems_path,
                     double v_max, std::uint32_t slot_len, const std::string& out_path) {
  iotrace::AuthorityStore store;
  iotrace::ingest_records(store, iotrace::load_records_jsonl(records_path));

  std::ifstream f(totems_path);
  if (!f) throw iotrace::ConfigError("cannot read totems file " + totems_path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw iotrace::ConfigError(std::string("totems file: ") + e.what());
  }
  if (!j.contains("totems") || !j["totems"].is_array()) {
    throw iotrace::ConfigError("totems file: missing \"totems\" array");
  }
  std::map<std::string, std::pair<double, double>> positions;
  for (const auto& tj : j["totems"]) {
    if (!tj.contains("id") || !tj.contains("x") || !tj.contains("y")) {
      throw iotrace::ConfigError("totems file: each entry needs id, x, y");
    }
    positions[tj["id"].get<std::string>()] = {tj["x"].get<double>(), tj["y"].get<double>()};
  }

  std::set<iotrace::Beacon> flagged;
  try {
    flagged = iotrace::detect_fraud(store, v_max, positions, slot_len);
  } catch (const std::invalid_argument& e) {
    throw iotrace::ConfigError(e.what());
  }
  std::vector<std::string> hex;
  for (const iotrace::Beacon& b : flagged) hex.push_back(b.hex());
  write_text(out_path, json{{"flagged", hex}}.dump(2) + "\n");
  return kOk;
}

int run_match(const std::string& key_hex, const std::string& published_path, std::uint64_t now_s,
              std::uint32_t threshold_s, std::uint32_t slot_len, std::uint32_t lookback_days,
              const std::string& out_path) {
  auto key = iotrace::from_hex_exact<16>(key_hex);
  if (!key) throw iotrace::ConfigError("--key: expected 32 lowercase hex chars");
  iotrace::DeviceState device;
  device.key.key = *key;
  device.risk_threshold_s = threshold_s;
  device.slot_len_s = slot_len;
  device.lookback_days = lookback_days;
  const iotrace::PublishedList list = iotrace::load_published(published_path);
  const iotrace::ExposureReport report = iotrace::match_published(device, list, now_s);
  write_text(out_path, iotrace::report_to_json(report).dump(2) + "\n");
  return kOk;
}

int run_attack(const std::string& eavesdrop_path, const std::vector<std::string>& published_paths,
               const std::string& targets_path, std::uint32_t epsilon, std::uint32_t slot_len,
               double radius, std::uint64_t seed, const std::string& out_path) {
  const iotrace::EavesdropLog log = iotrace::load_eavesdrop_jsonl(eavesdrop_path);
  std::vector<iotrace::PublishedList> lists;
  for (const std::string& p : published_paths) lists.push_back(iotrace::load_published(p));

  std::ifstream f(targets_path);
  if (!f) throw iotrace::ConfigError("cannot read targets file " + targets_path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw iotrace::ConfigError(std::string("targets file: ") + e.what());
  }
  if (!j.contains("targets") || !j["targets"].is_array()) {
    throw iotrace::ConfigError("targets file: missing \"targets\" array");
  }
  std::vector<iotrace::TargetCapture> captures;
  for (const auto& tj : j["targets"]) {
    if (!tj.contains("id") || !tj.contains("payloads") || !tj["payloads"].is_array()) {
      throw iotrace::ConfigError("targets file: each entry needs id and payloads[]");
    }
    iotrace::TargetCapture capture;
    capture.target_id = tj["id"].get<std::string>();
    for (const auto& pj : tj["payloads"]) {
      auto payload = iotrace::from_hex(pj.get<std::string>());
      if (!payload) throw iotrace::ConfigError("targets file: invalid payload hex");
      // anchor each payload at its first over-the-air observation
      for (const iotrace::EavesdropEntry& e : log.entries) {
        if (e.payload == *payload) {
          capture.entries.push_back(e);
          break;
        }
      }
    }
    captures.push_back(std::move(capture));
  }

  iotrace::Rng rng(seed);
  const auto inferences =
      iotrace::infer_health_status(log, lists, captures, radius, epsilon, slot_len, rng);
  const auto trajectory = iotrace::recover_trajectory(log, lists, slot_len);
  write_text(out_path, iotrace::attack_report_to_json(inferences, trajectory).dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "iotrace: IoT-edge contact-tracing protocol simulator and offline protocol tools"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand(
      "simulate",
      "Run one deterministic simulation (or a seed sweep) and write all artifacts.\n"
      "Config example: {\"seed\":1,\"mode\":\"centralized\",\"duration_s\":3600,"
      "\"totems\":[{\"id\":\"T-0001\",\"x\":0,\"y\":0,\"radio_range_m\":50}],"
      "\"devices\":{\"count\":4},\"infections\":[{\"device\":0,\"diagnosis_time_s\":1800}]}");
  simulate->add_option("--config", sim_args.config_path, "SimConfig JSON document")->required();
  simulate->add_option("--out", sim_args.out_dir, "output directory")->required();
  std::uint64_t seed_override = 0;
  auto* seed_opt = simulate->add_option("--seed", seed_override, "override config seed");
  simulate->add_option("--mode", sim_args.mode,
                       "override config mode: centralized | decentralized | privacy_enhanced");
  simulate->add_flag("--overwrite", sim_args.overwrite, "allow writing into a non-empty directory");
  simulate->add_option("--sweep", sim_args.sweep,
                       "run seeds=<first>..<last> in parallel, one subdirectory per seed");

  std::string records_path, positives_path, out_path;
  std::uint32_t epsilon = 1;
  std::uint64_t seed = 0;
  auto* reconcile = app.add_subcommand(
      "reconcile",
      "Reconcile a positive disclosure against stored records and publish the flat list.\n"
      "Records line: {\"totem\":\"T-0001\",\"slot\":12345,\"beacon\":\"<hex32>\"}\n"
      "Positives: JSON array of {\"slot\":12345,\"beacon\":\"<hex32>\"}");
  reconcile->add_option("--records", records_path, "BeaconRecord JSONL file")->required();
  reconcile->add_option("--positives", positives_path, "PositiveDisclosure JSON file")->required();
  reconcile->add_option("--epsilon", epsilon, "window half-width in slots (default 1)");
  reconcile->add_option("--seed", seed, "publication shuffle seed");
  reconcile->add_option("--out", out_path, "published.json output path")->required();

  std::string totems_path;
  double v_max = 42.0;
  std::uint32_t slot_len = 600;
  auto* detect = app.add_subcommand(
      "detect-fraud",
      "Flag beacons whose sightings are speed-infeasible across totems.\n"
      "Totems file: {\"totems\":[{\"id\":\"T-0001\",\"x\":0,\"y\":0}]}");
  detect->add_option("--records", records_path, "BeaconRecord JSONL file")->required();
  detect->add_option("--totems", totems_path, "totem positions JSON")->required();
  detect->add_option("--v-max", v_max, "max plausible ground speed, m/s (default 42)");
  detect->add_option("--slot-len", slot_len, "slot length in seconds (default 600)");
  detect->add_option("--out", out_path, "flagged.json output path")->required();

  std::string key_hex, published_path;
  std::uint64_t now_s = 0;
  std::uint32_t threshold_s = 900;
  std::uint32_t lookback_days = 14;
  auto* match = app.add_subcommand(
      "match",
      "Regenerate a device's beacons and match them against a published list.\n"
      "Published: {\"published_at\":0,\"beacons\":[\"<hex32>\"]}");
  match->add_option("--key", key_hex, "device key, 32 hex chars")->required();
  match->add_option("--published", published_path, "published.json file")->required();
  match->add_option("--now", now_s, "current time, seconds since epoch")->required();
  match->add_option("--threshold", threshold_s, "risk threshold, seconds (default 900)");
  match->add_option("--slot-len", slot_len, "slot length in seconds (default 600)");
  match->add_option("--lookback", lookback_days, "lookback window, days (default 14)");
  match->add_option("--out", out_path, "report.json output path")->required();

  std::string eavesdrop_path, targets_path;
  std::vector<std::string> published_paths;
  double radius = 50.0;
  auto* attack = app.add_subcommand(
      "attack",
      "Run the eavesdropper analyses offline over a captured log.\n"
      "Eavesdrop line: {\"payload\":\"<hex>\",\"t\":12.5,\"x\":3.0,\"y\":4.0}\n"
      "Targets: {\"targets\":[{\"id\":\"victim\",\"payloads\":[\"<hex>\"]}]}");
  attack->add_option("--eavesdrop", eavesdrop_path, "EavesdropLog JSONL file")->required();
  attack->add_option("--published", published_paths, "published.json files")->required();
  attack->add_option("--targets", targets_path, "targeted-capture JSON file")->required();
  attack->add_option("--epsilon", epsilon, "window half-width in slots (default 1)");
  attack->add_option("--slot-len", slot_len, "slot length in seconds (default 600)");
  attack->add_option("--radius", radius, "co-location radius in meters (default 50)");
  attack->add_option("--seed", seed, "pinpoint draw seed");
  attack->add_option("--out", out_path, "attack_report.json output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      if (seed_opt->count() > 0) sim_args.seed = seed_override;
      return run_simulate(sim_args);
    }
    if (reconcile->parsed()) {
      return run_reconcile(records_path, positives_path, epsilon, seed, out_path);
    }
    if (detect->parsed()) {
      return run_detect_fraud(records_path, totems_path, v_max, slot_len, out_path);
    }
    if (match->parsed()) {
      return run_match(key_hex, published_path, now_s, threshold_s, slot_len, lookback_days,
                       out_path);
    }
    if (attack->parsed()) {
      return run_attack(eavesdrop_path, published_paths, targets_path, epsilon, slot_len, radius,
                        seed, out_path);
    }
  } catch (const iotrace::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}
