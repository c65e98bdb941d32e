#include "iotrace/io.hpp"

#include <fstream>
#include <sstream>

#include "iotrace/hex.hpp"

namespace iotrace {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw ConfigError("config error at " + path + ": " + why);
}

const json& req_field(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) bad(path + "." + key, "missing required field");
  return *it;
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) bad(path, "expected an integer");
  if (j.is_number_integer() && j.get<std::int64_t>() < 0) bad(path, "must be >= 0");
  return j.get<std::uint64_t>();
}

std::uint32_t as_u32(const json& j, const std::string& path) {
  const std::uint64_t v = as_u64(j, path);
  if (v > UINT32_MAX) bad(path, "value too large");
  return static_cast<std::uint32_t>(v);
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) bad(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array");
  return j;
}

Beacon as_beacon(const json& j, const std::string& path) {
  auto b = Beacon::from_hex(as_string(j, path));
  if (!b) bad(path, "expected 32 lowercase hex chars");
  return *b;
}

json segment_to_json(const TrajectorySegment& seg, const std::vector<std::string>& zone_ids) {
  json out{{"t0_s", static_cast<double>(seg.t0_ms) / 1000.0},
           {"t1_s", static_cast<double>(seg.t1_ms) / 1000.0},
           {"x0", seg.x0},
           {"y0", seg.y0},
           {"x1", seg.x1},
           {"y1", seg.y1}};
  if (seg.zone && *seg.zone < zone_ids.size()) {
    out["zone"] = zone_ids[*seg.zone];
  } else {
    out["zone"] = nullptr;
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

}  // namespace

SimConfig config_from_json(const json& j) {
  if (!j.is_object()) bad("config", "expected a JSON object");
  SimConfig c;
  c.seed = as_u64(req_field(j, "seed", "config"), "config.seed");
  {
    const std::string mode = as_string(req_field(j, "mode", "config"), "config.mode");
    auto parsed = mode_from_string(mode);
    if (!parsed) bad("config.mode", "expected centralized | decentralized | privacy_enhanced");
    c.mode = *parsed;
  }
  c.duration_s = as_u64(req_field(j, "duration_s", "config"), "config.duration_s");
  if (j.contains("slot_len_s")) c.slot_len_s = as_u32(j["slot_len_s"], "config.slot_len_s");
  if (j.contains("broadcast_interval_s")) {
    c.broadcast_interval_s = as_double(j["broadcast_interval_s"], "config.broadcast_interval_s");
  }
  if (j.contains("epsilon_slots")) c.epsilon_slots = as_u32(j["epsilon_slots"], "config.epsilon_slots");
  if (j.contains("risk_threshold_s")) {
    c.risk_threshold_s = as_u32(j["risk_threshold_s"], "config.risk_threshold_s");
  }
  if (j.contains("lookback_days")) c.lookback_days = as_u32(j["lookback_days"], "config.lookback_days");
  if (j.contains("v_max_mps")) c.v_max_mps = as_double(j["v_max_mps"], "config.v_max_mps");
  if (j.contains("fraud_filter")) c.fraud_filter = as_bool(j["fraud_filter"], "config.fraud_filter");
  if (j.contains("encrypt_at_rest")) {
    c.encrypt_at_rest = as_bool(j["encrypt_at_rest"], "config.encrypt_at_rest");
  }
  if (j.contains("contact_radius_m")) {
    c.contact_radius_m = as_double(j["contact_radius_m"], "config.contact_radius_m");
  }

  const json& totems = as_array(req_field(j, "totems", "config"), "config.totems");
  for (std::size_t i = 0; i < totems.size(); ++i) {
    const std::string path = "config.totems[" + std::to_string(i) + "]";
    const json& tj = totems[i];
    TotemSpec t;
    t.id = as_string(req_field(tj, "id", path), path + ".id");
    t.x_m = as_double(req_field(tj, "x", path), path + ".x");
    t.y_m = as_double(req_field(tj, "y", path), path + ".y");
    t.radio_range_m = as_double(req_field(tj, "radio_range_m", path), path + ".radio_range_m");
    if (tj.contains("reachable")) t.reachable = as_bool(tj["reachable"], path + ".reachable");
    c.totems.push_back(std::move(t));
  }

  if (j.contains("places")) {
    const json& places = as_array(j["places"], "config.places");
    for (std::size_t i = 0; i < places.size(); ++i) {
      const std::string path = "config.places[" + std::to_string(i) + "]";
      PlaceSpec p;
      p.id = as_string(req_field(places[i], "id", path), path + ".id");
      p.x_m = as_double(req_field(places[i], "x", path), path + ".x");
      p.y_m = as_double(req_field(places[i], "y", path), path + ".y");
      c.places.push_back(std::move(p));
    }
  } else {
    // Default coverage gap: somewhere far away from every totem.
    c.places.push_back(PlaceSpec{"outside", 1.0e6, 1.0e6});
  }

  const json& dj = req_field(j, "devices", "config");
  c.devices.count = as_u32(req_field(dj, "count", "config.devices"), "config.devices.count");
  if (dj.contains("speed_mps")) c.devices.speed_mps = as_double(dj["speed_mps"], "config.devices.speed_mps");
  if (dj.contains("dwell_mean_s")) {
    c.devices.dwell_mean_s = as_double(dj["dwell_mean_s"], "config.devices.dwell_mean_s");
  }
  if (dj.contains("transition")) {
    const json& m = as_array(dj["transition"], "config.devices.transition");
    for (std::size_t r = 0; r < m.size(); ++r) {
      const json& row = as_array(m[r], "config.devices.transition[" + std::to_string(r) + "]");
      std::vector<double> out_row;
      for (std::size_t q = 0; q < row.size(); ++q) {
        out_row.push_back(as_double(row[q], "config.devices.transition[" + std::to_string(r) + "][" +
                                                std::to_string(q) + "]"));
      }
      c.devices.transition.push_back(std::move(out_row));
    }
  }
  if (dj.contains("initial_zone")) {
    const json& zones = as_array(dj["initial_zone"], "config.devices.initial_zone");
    for (std::size_t q = 0; q < zones.size(); ++q) {
      c.devices.initial_zone.push_back(
          as_u32(zones[q], "config.devices.initial_zone[" + std::to_string(q) + "]"));
    }
  }

  if (j.contains("infections")) {
    const json& infs = as_array(j["infections"], "config.infections");
    for (std::size_t i = 0; i < infs.size(); ++i) {
      const std::string path = "config.infections[" + std::to_string(i) + "]";
      InfectionSpec inf;
      inf.device = as_u32(req_field(infs[i], "device", path), path + ".device");
      inf.diagnosis_time_s =
          as_u64(req_field(infs[i], "diagnosis_time_s", path), path + ".diagnosis_time_s");
      c.infections.push_back(inf);
    }
  }

  if (j.contains("adversary")) {
    const json& aj = j["adversary"];
    if (aj.contains("coverage")) {
      const json& cov = aj["coverage"];
      if (cov.is_string()) {
        const std::string s = cov.get<std::string>();
        if (s == "global") c.adversary.coverage = CoverageKind::global;
        else if (s == "none") c.adversary.coverage = CoverageKind::none;
        else bad("config.adversary.coverage", "expected global | none | [totem ids]");
      } else if (cov.is_array()) {
        c.adversary.coverage = CoverageKind::totems;
        for (std::size_t i = 0; i < cov.size(); ++i) {
          c.adversary.coverage_totems.push_back(
              as_string(cov[i], "config.adversary.coverage[" + std::to_string(i) + "]"));
        }
      } else {
        bad("config.adversary.coverage", "expected global | none | [totem ids]");
      }
    }
    if (aj.contains("targets")) {
      const json& ts = as_array(aj["targets"], "config.adversary.targets");
      for (std::size_t i = 0; i < ts.size(); ++i) {
        c.adversary.targets.push_back(
            as_u32(ts[i], "config.adversary.targets[" + std::to_string(i) + "]"));
      }
    }
    if (aj.contains("replay")) {
      const json& rs = as_array(aj["replay"], "config.adversary.replay");
      for (std::size_t i = 0; i < rs.size(); ++i) {
        const std::string path = "config.adversary.replay[" + std::to_string(i) + "]";
        ReplayDirective r;
        r.victim_device = as_u32(req_field(rs[i], "victim_device", path), path + ".victim_device");
        r.capture_totem = as_string(req_field(rs[i], "capture_totem", path), path + ".capture_totem");
        r.replay_totem = as_string(req_field(rs[i], "replay_totem", path), path + ".replay_totem");
        r.start_s = as_u64(req_field(rs[i], "start_s", path), path + ".start_s");
        r.end_s = as_u64(req_field(rs[i], "end_s", path), path + ".end_s");
        c.adversary.replays.push_back(std::move(r));
      }
    }
    if (aj.contains("seed")) c.adversary.seed = as_u64(aj["seed"], "config.adversary.seed");
  }

  if (j.contains("energy")) {
    const json& ej = j["energy"];
    EnergySpec& e = c.energy;
    if (ej.contains("tx_power_mw")) e.tx_power_mw = as_double(ej["tx_power_mw"], "config.energy.tx_power_mw");
    if (ej.contains("tx_time_per_beacon_s")) {
      e.tx_time_per_beacon_s = as_double(ej["tx_time_per_beacon_s"], "config.energy.tx_time_per_beacon_s");
    }
    if (ej.contains("rx_power_mw")) e.rx_power_mw = as_double(ej["rx_power_mw"], "config.energy.rx_power_mw");
    if (ej.contains("scan_duty_cycle")) {
      e.scan_duty_cycle = as_double(ej["scan_duty_cycle"], "config.energy.scan_duty_cycle");
    }
    if (ej.contains("beacon_interval_s")) {
      e.beacon_interval_s = as_double(ej["beacon_interval_s"], "config.energy.beacon_interval_s");
    }
    if (ej.contains("beacon_size_B")) e.beacon_size_B = as_u32(ej["beacon_size_B"], "config.energy.beacon_size_B");
    if (ej.contains("crypto_ms_per_day")) {
      e.crypto_ms_per_day = as_double(ej["crypto_ms_per_day"], "config.energy.crypto_ms_per_day");
    }
  }

  validate(c);
  return c;
}

json config_to_json(const SimConfig& c) {
  json totems = json::array();
  for (const TotemSpec& t : c.totems) {
    totems.push_back(json{{"id", t.id},
                          {"x", t.x_m},
                          {"y", t.y_m},
                          {"radio_range_m", t.radio_range_m},
                          {"reachable", t.reachable}});
  }
  json places = json::array();
  for (const PlaceSpec& p : c.places) {
    places.push_back(json{{"id", p.id}, {"x", p.x_m}, {"y", p.y_m}});
  }
  json devices{{"count", c.devices.count},
               {"speed_mps", c.devices.speed_mps},
               {"dwell_mean_s", c.devices.dwell_mean_s}};
  if (!c.devices.transition.empty()) devices["transition"] = c.devices.transition;
  if (!c.devices.initial_zone.empty()) devices["initial_zone"] = c.devices.initial_zone;
  json infections = json::array();
  for (const InfectionSpec& inf : c.infections) {
    infections.push_back(json{{"device", inf.device}, {"diagnosis_time_s", inf.diagnosis_time_s}});
  }
  json adversary;
  switch (c.adversary.coverage) {
    case CoverageKind::global: adversary["coverage"] = "global"; break;
    case CoverageKind::none: adversary["coverage"] = "none"; break;
    case CoverageKind::totems: adversary["coverage"] = c.adversary.coverage_totems; break;
  }
  adversary["targets"] = c.adversary.targets;
  json replays = json::array();
  for (const ReplayDirective& r : c.adversary.replays) {
    replays.push_back(json{{"victim_device", r.victim_device},
                           {"capture_totem", r.capture_totem},
                           {"replay_totem", r.replay_totem},
                           {"start_s", r.start_s},
                           {"end_s", r.end_s}});
  }
  adversary["replay"] = replays;
  if (c.adversary.seed) adversary["seed"] = *c.adversary.seed;

  return json{{"seed", c.seed},
              {"mode", to_string(c.mode)},
              {"slot_len_s", c.slot_len_s},
              {"broadcast_interval_s", c.broadcast_interval_s},
              {"epsilon_slots", c.epsilon_slots},
              {"risk_threshold_s", c.risk_threshold_s},
              {"lookback_days", c.lookback_days},
              {"duration_s", c.duration_s},
              {"v_max_mps", c.v_max_mps},
              {"fraud_filter", c.fraud_filter},
              {"encrypt_at_rest", c.encrypt_at_rest},
              {"contact_radius_m", c.contact_radius_m},
              {"totems", totems},
              {"places", places},
              {"devices", devices},
              {"infections", infections},
              {"adversary", adversary},
              {"energy", json{{"tx_power_mw", c.energy.tx_power_mw},
                              {"tx_time_per_beacon_s", c.energy.tx_time_per_beacon_s},
                              {"rx_power_mw", c.energy.rx_power_mw},
                              {"scan_duty_cycle", c.energy.scan_duty_cycle},
                              {"beacon_interval_s", c.energy.beacon_interval_s},
                              {"beacon_size_B", c.energy.beacon_size_B},
                              {"crypto_ms_per_day", c.energy.crypto_ms_per_day}}}};
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string record_to_jsonl_line(const BeaconRecord& r) {
  return "{\"totem\":\"" + r.totem_id + "\",\"slot\":" + std::to_string(r.slot) +
         ",\"beacon\":\"" + r.beacon.hex() + "\"}";
}

BeaconRecord record_from_jsonl_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ConfigError("records line " + std::to_string(line_no) + ": " + e.what());
  }
  const std::string path = "records line " + std::to_string(line_no);
  BeaconRecord r;
  r.totem_id = as_string(req_field(j, "totem", path), path + ".totem");
  r.slot = as_u64(req_field(j, "slot", path), path + ".slot");
  r.beacon = as_beacon(req_field(j, "beacon", path), path + ".beacon");
  return r;
}

std::vector<BeaconRecord> load_records_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read records file " + path.string());
  std::vector<BeaconRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(record_from_jsonl_line(line, line_no));
  }
  return out;
}

json disclosure_to_json(const PositiveDisclosure& d) {
  json out = json::array();
  for (const auto& [slot, beacon] : d.entries) {
    out.push_back(json{{"slot", slot}, {"beacon", beacon.hex()}});
  }
  return out;
}

PositiveDisclosure disclosure_from_json(const json& j) {
  const json& arr = as_array(j, "disclosure");
  PositiveDisclosure d;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "disclosure[" + std::to_string(i) + "]";
    const SlotIndex slot = as_u64(req_field(arr[i], "slot", path), path + ".slot");
    const Beacon b = as_beacon(req_field(arr[i], "beacon", path), path + ".beacon");
    d.entries.emplace_back(slot, b);
  }
  return d;
}

PositiveDisclosure load_disclosure(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read disclosure file " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("disclosure file " + path.string() + ": " + e.what());
  }
  return disclosure_from_json(j);
}

PublishedList published_from_json(const json& j) {
  PublishedList list;
  list.published_at_s = as_u64(req_field(j, "published_at", "published"), "published.published_at");
  const json& arr = as_array(req_field(j, "beacons", "published"), "published.beacons");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    list.beacons.insert(as_beacon(arr[i], "published.beacons[" + std::to_string(i) + "]"));
  }
  return list;
}

PublishedList load_published(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read published file " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("published file " + path.string() + ": " + e.what());
  }
  return published_from_json(j);
}

json report_to_json(const ExposureReport& r) {
  return json{{"matched_slots", std::vector<SlotIndex>(r.matched_slots.begin(), r.matched_slots.end())},
              {"exposure_seconds", r.exposure_seconds},
              {"notified", r.notified}};
}

std::string eavesdrop_to_jsonl_line(const EavesdropEntry& e) {
  json j{{"payload", to_hex(e.payload)},
         {"t", static_cast<double>(e.t_ms) / 1000.0},
         {"x", e.x_m},
         {"y", e.y_m}};
  return j.dump();
}

EavesdropEntry eavesdrop_from_jsonl_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ConfigError("eavesdrop line " + std::to_string(line_no) + ": " + e.what());
  }
  const std::string path = "eavesdrop line " + std::to_string(line_no);
  EavesdropEntry e;
  auto payload = from_hex(as_string(req_field(j, "payload", path), path + ".payload"));
  if (!payload) throw ConfigError(path + ".payload: invalid hex");
  e.payload = std::move(*payload);
  e.t_ms = static_cast<std::uint64_t>(
      std::llround(as_double(req_field(j, "t", path), path + ".t") * 1000.0));
  e.x_m = as_double(req_field(j, "x", path), path + ".x");
  e.y_m = as_double(req_field(j, "y", path), path + ".y");
  return e;
}

EavesdropLog load_eavesdrop_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read eavesdrop file " + path.string());
  EavesdropLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    log.entries.push_back(eavesdrop_from_jsonl_line(line, line_no));
  }
  return log;
}

json attack_report_to_json(const std::vector<TargetInference>& inferences,
                           const std::vector<TrajectoryPoint>& trajectory) {
  json health = json::array();
  for (const TargetInference& inf : inferences) {
    json entry{{"target", inf.target_id},
               {"verdict", inf.positive ? "positive" : "negative"},
               {"confidence", inf.confidence},
               {"k", inf.cluster_k}};
    if (inf.matched) entry["matched_beacon"] = inf.matched->hex();
    if (inf.pinpoint) entry["pinpoint"] = inf.pinpoint->hex();
    health.push_back(std::move(entry));
  }
  json traj = json::array();
  for (const TrajectoryPoint& p : trajectory) {
    std::vector<std::string> beacons;
    beacons.reserve(p.beacons.size());
    for (const Beacon& b : p.beacons) beacons.push_back(b.hex());
    traj.push_back(json{{"x", p.x_m}, {"y", p.y_m}, {"slot", p.slot}, {"beacons", beacons}});
  }
  return json{{"health_inference", health}, {"trajectory", traj}};
}

json metrics_to_json(const SimOutput& output) {
  const CostReport cost = cost_report(cost_params_from(output.config.energy),
                                      static_cast<double>(output.config.duration_s),
                                      /*scan_enabled=*/false);
  const KAnonymityProfile profile = k_anonymity_profile(output);
  const NotificationAccuracy acc = notification_accuracy(output);

  json hist = json::array();
  for (const auto& [k, count] : profile.histogram) {
    hist.push_back(json{{"k", k}, {"count", count}});
  }
  json notification{{"coverage_missed_contacts", acc.coverage_missed}};
  notification["precision"] = acc.precision ? json(*acc.precision) : json(nullptr);
  notification["recall"] = acc.recall ? json(*acc.recall) : json(nullptr);

  return json{{"rf_energy_mJ_per_min", cost.rf_energy_mJ_per_min},
              {"tx_bytes_per_min", cost.tx_bytes_per_min},
              {"contact_storage_B", cost.contact_storage_B},
              {"crypto_ms_per_day", cost.crypto_ms_per_day},
              {"k_anonymity", json{{"histogram", hist},
                                   {"min", profile.min_k},
                                   {"median", profile.median_k}}},
              {"notification", notification}};
}

std::string k_histogram_csv(const KAnonymityProfile& profile) {
  std::string out = "k,count\n";
  for (const auto& [k, count] : profile.histogram) {
    out += std::to_string(k) + "," + std::to_string(count) + "\n";
  }
  return out;
}

void write_outputs(const SimOutput& output, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  write_file(dir / "config_echo.json", config_to_json(output.config).dump(2) + "\n");

  {
    std::string records;
    for (const BeaconRecord& r : output.records) records += record_to_jsonl_line(r) + "\n";
    write_file(dir / "records.jsonl", records);
  }

  for (std::size_t i = 0; i < output.publications.size(); ++i) {
    const Publication& pub = output.publications[i];
    write_file(dir / ("positives_" + std::to_string(i) + ".json"),
               disclosure_to_json(pub.disclosure).dump(2) + "\n");
    write_file(dir / ("published_" + std::to_string(i) + ".json"), pub.serialized);
  }

  {
    json reports = json::array();
    for (const auto& [device, report] : output.reports) {
      json r = report_to_json(report);
      r["device"] = device;
      reports.push_back(std::move(r));
    }
    write_file(dir / "exposure_reports.json", reports.dump(2) + "\n");
  }

  {
    std::string lines;
    for (const EavesdropEntry& e : output.eavesdrop.entries) {
      lines += eavesdrop_to_jsonl_line(e) + "\n";
    }
    write_file(dir / "eavesdrop.jsonl", lines);
  }

  write_file(dir / "attack_report.json",
             attack_report_to_json(output.inferences, output.recovered_trajectory).dump(2) + "\n");

  {
    std::vector<std::string> flagged;
    for (const Beacon& b : output.fraud_flagged) flagged.push_back(b.hex());
    write_file(dir / "fraud_flags.json", json{{"flagged", flagged}}.dump(2) + "\n");
  }

  {
    std::vector<std::string> zone_ids;
    for (const TotemSpec& t : output.config.totems) zone_ids.push_back(t.id);
    for (const PlaceSpec& p : output.config.places) zone_ids.push_back(p.id);

    json trajectories = json::array();
    for (const auto& traj : output.truth.trajectories) {
      json segs = json::array();
      for (const TrajectorySegment& seg : traj) segs.push_back(segment_to_json(seg, zone_ids));
      trajectories.push_back(std::move(segs));
    }
    json presence = json::array();
    for (const auto& [device, totem, slot] : output.truth.presence) {
      presence.push_back(json{{"device", device}, {"totem", totem}, {"slot", slot}});
    }
    json traceable = json::array();
    for (const auto& [device, slots] : output.truth.traceable_slots) {
      traceable.push_back(
          json{{"device", device},
               {"slots", std::vector<SlotIndex>(slots.begin(), slots.end())},
               {"exposure_s", slots.size() * static_cast<std::uint64_t>(output.config.slot_len_s)}});
    }
    json physical = json::array();
    for (const auto& [pair, exposure] : output.truth.physical_exposure_s) {
      physical.push_back(json{{"a", pair.first}, {"b", pair.second}, {"exposure_s", exposure}});
    }
    write_file(dir / "ground_truth.json",
               json{{"trajectories", trajectories},
                    {"presence", presence},
                    {"traceable", traceable},
                    {"true_contacts", std::vector<std::uint32_t>(output.truth.true_contacts.begin(),
                                                                 output.truth.true_contacts.end())},
                    {"physical", physical}}
                       .dump(2) +
                   "\n");
  }

  {
    std::vector<std::string> injected;
    for (const Beacon& b : output.injected_beacons) injected.push_back(b.hex());
    write_file(dir / "run_report.json",
               json{{"unreachable_totems", output.run_report.unreachable_totems},
                    {"drop_counts", output.run_report.drop_counts},
                    {"records_stored", output.run_report.records_stored},
                    {"transmissions", output.run_report.transmissions},
                    {"replays_injected", output.run_report.replays_injected},
                    {"notified_devices", output.run_report.notified_devices},
                    {"publication_count", output.publications.size()},
                    {"injected_beacons", injected}}
                       .dump(2) +
                   "\n");
  }

  write_file(dir / "metrics.json", metrics_to_json(output).dump(2) + "\n");
  write_file(dir / "metrics_k_hist.csv", k_histogram_csv(k_anonymity_profile(output)));
}

}  // namespace iotrace
