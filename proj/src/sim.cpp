#include "iotrace/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

namespace iotrace {

namespace {

constexpr std::uint64_t kKeyStreamTag = 0x6b65797374726d31ull;
constexpr std::uint64_t kSessionTag = 0x73657373696f6e31ull;
constexpr std::uint64_t kPublishTag = 0x7075626c69736831ull;
constexpr std::uint64_t kAdversaryTag = 0x6164766572733131ull;
constexpr std::uint64_t kMobilityTag = 0x6d6f62696c697431ull;

double distance(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

std::uint32_t draw_next_zone(const MobilityModel& model, std::uint32_t current, Rng& rng) {
  const auto& row = model.transition[current];
  const double u = rng.unit();
  double cum = 0.0;
  for (std::uint32_t i = 0; i < row.size(); ++i) {
    cum += row[i];
    if (u < cum) return i;
  }
  return static_cast<std::uint32_t>(row.size() - 1);
}

}  // namespace

void validate(const MobilityModel& model) {
  if (model.zones.empty()) throw ConfigError("mobility: no zones (add totems or places)");
  if (!(model.dwell_mean_s > 0.0)) {
    throw ConfigError("devices.dwell_mean_s: must be > 0");
  }
  if (!(model.speed_mps > 0.0)) throw ConfigError("devices.speed_mps: must be > 0");
  if (model.transition.size() != model.zones.size()) {
    throw ConfigError("devices.transition: matrix must be square over all zones");
  }
  for (std::size_t i = 0; i < model.transition.size(); ++i) {
    const auto& row = model.transition[i];
    if (row.size() != model.zones.size()) {
      throw ConfigError("devices.transition: row " + std::to_string(i) + " has wrong length");
    }
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0) {
        throw ConfigError("devices.transition: negative entry in row " + std::to_string(i));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("devices.transition: row " + std::to_string(i) +
                        " sums to " + std::to_string(sum) + ", expected 1");
    }
  }
}

void validate(const SimConfig& config) {
  if (config.slot_len_s == 0) throw ConfigError("slot_len_s: must be > 0");
  if (!(config.broadcast_interval_s > 0.0)) {
    throw ConfigError("broadcast_interval_s: must be > 0");
  }
  const auto itv_ms = static_cast<std::uint64_t>(std::llround(config.broadcast_interval_s * 1000.0));
  if (itv_ms == 0) throw ConfigError("broadcast_interval_s: below 1 ms resolution");
  if (itv_ms > static_cast<std::uint64_t>(config.slot_len_s) * 1000ull) {
    throw ConfigError("broadcast_interval_s: must not exceed slot_len_s");
  }
  if (config.duration_s == 0) throw ConfigError("duration_s: must be > 0");
  if (config.risk_threshold_s == 0) throw ConfigError("risk_threshold_s: must be > 0");
  if (config.lookback_days == 0) throw ConfigError("lookback_days: must be > 0");
  if (!(config.v_max_mps > 0.0)) throw ConfigError("v_max_mps: must be > 0");
  if (!(config.contact_radius_m > 0.0)) throw ConfigError("contact_radius_m: must be > 0");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < config.totems.size(); ++i) {
    const TotemSpec& t = config.totems[i];
    if (t.id.empty()) throw ConfigError("totems[" + std::to_string(i) + "].id: empty");
    if (!ids.insert(t.id).second) {
      throw ConfigError("totems[" + std::to_string(i) + "].id: duplicate id " + t.id);
    }
    if (!(t.radio_range_m > 0.0)) {
      throw ConfigError("totems[" + std::to_string(i) + "].radio_range_m: must be > 0");
    }
  }
  for (std::size_t i = 0; i < config.places.size(); ++i) {
    const PlaceSpec& p = config.places[i];
    if (p.id.empty()) throw ConfigError("places[" + std::to_string(i) + "].id: empty");
    if (!ids.insert(p.id).second) {
      throw ConfigError("places[" + std::to_string(i) + "].id: duplicate id " + p.id);
    }
  }
  if (config.totems.empty() && config.places.empty()) {
    throw ConfigError("totems: at least one totem or place is required");
  }
  if (config.devices.count == 0) throw ConfigError("devices.count: must be > 0");

  const std::size_t zone_count = config.totems.size() + config.places.size();
  if (!config.devices.transition.empty() && config.devices.transition.size() != zone_count) {
    throw ConfigError("devices.transition: matrix must be square over all zones");
  }
  if (!config.devices.initial_zone.empty()) {
    if (config.devices.initial_zone.size() != config.devices.count) {
      throw ConfigError("devices.initial_zone: need one entry per device");
    }
    for (std::uint32_t z : config.devices.initial_zone) {
      if (z >= zone_count) throw ConfigError("devices.initial_zone: zone index out of range");
    }
  }
  if (!(config.devices.dwell_mean_s > 0.0)) throw ConfigError("devices.dwell_mean_s: must be > 0");
  if (!(config.devices.speed_mps > 0.0)) throw ConfigError("devices.speed_mps: must be > 0");

  for (std::size_t i = 0; i < config.infections.size(); ++i) {
    const InfectionSpec& inf = config.infections[i];
    if (inf.device >= config.devices.count) {
      throw ConfigError("infections[" + std::to_string(i) + "].device: unknown device");
    }
    if (inf.diagnosis_time_s >= config.duration_s) {
      throw ConfigError("infections[" + std::to_string(i) +
                        "].diagnosis_time_s: must be < duration_s");
    }
  }
  for (std::uint32_t t : config.adversary.targets) {
    if (t >= config.devices.count) throw ConfigError("adversary.targets: unknown device");
  }
  if (config.adversary.coverage == CoverageKind::totems) {
    for (const std::string& id : config.adversary.coverage_totems) {
      if (ids.count(id) == 0) throw ConfigError("adversary.coverage: unknown totem " + id);
    }
  }
  for (std::size_t i = 0; i < config.adversary.replays.size(); ++i) {
    const ReplayDirective& r = config.adversary.replays[i];
    const std::string where = "adversary.replay[" + std::to_string(i) + "]";
    if (r.victim_device >= config.devices.count) {
      throw ConfigError(where + ".victim_device: unknown device");
    }
    auto is_totem = [&](const std::string& id) {
      return std::any_of(config.totems.begin(), config.totems.end(),
                         [&](const TotemSpec& t) { return t.id == id; });
    };
    if (!is_totem(r.capture_totem)) throw ConfigError(where + ".capture_totem: unknown totem");
    if (!is_totem(r.replay_totem)) throw ConfigError(where + ".replay_totem: unknown totem");
    if (r.start_s > r.end_s) throw ConfigError(where + ": start_s > end_s");
  }
  const EnergySpec& e = config.energy;
  if (e.tx_power_mw < 0 || e.tx_time_per_beacon_s < 0 || e.rx_power_mw < 0) {
    throw ConfigError("energy: powers and times must be >= 0");
  }
  if (e.scan_duty_cycle < 0.0 || e.scan_duty_cycle > 1.0) {
    throw ConfigError("energy.scan_duty_cycle: must be in [0, 1]");
  }
  if (!(e.beacon_interval_s > 0.0)) throw ConfigError("energy.beacon_interval_s: must be > 0");
}

std::pair<double, double> next_position(MobilityState& state, const MobilityModel& model,
                                        Rng& rng) {
  validate(model);
  const std::uint32_t next = draw_next_zone(model, state.zone, rng);
  state.zone = next;
  state.x_m = model.zones[next].x_m;
  state.y_m = model.zones[next].y_m;
  return {state.x_m, state.y_m};
}

std::vector<TrajectorySegment> build_trajectory(const MobilityModel& model,
                                                std::uint32_t start_zone,
                                                std::uint64_t duration_ms, Rng& rng) {
  std::vector<TrajectorySegment> segments;
  std::uint64_t t = 0;
  std::uint32_t zone = start_zone;
  double x = model.zones[zone].x_m;
  double y = model.zones[zone].y_m;

  while (t < duration_ms) {
    const auto dwell_ms = static_cast<std::uint64_t>(
        std::max<long long>(1, std::llround(rng.exponential(model.dwell_mean_s) * 1000.0)));
    const std::uint64_t dwell_end = std::min(t + dwell_ms, duration_ms);
    segments.push_back(TrajectorySegment{t, dwell_end, x, y, x, y, zone});
    t = dwell_end;
    if (t >= duration_ms) break;

    const std::uint32_t next = draw_next_zone(model, zone, rng);
    if (next == zone) continue;
    const double nx = model.zones[next].x_m;
    const double ny = model.zones[next].y_m;
    const double d = distance(x, y, nx, ny);
    const auto travel_ms = static_cast<std::uint64_t>(
        std::max<long long>(1, std::llround(d / model.speed_mps * 1000.0)));
    const std::uint64_t travel_end = std::min(t + travel_ms, duration_ms);
    const double frac = static_cast<double>(travel_end - t) / static_cast<double>(travel_ms);
    segments.push_back(
        TrajectorySegment{t, travel_end, x, y, x + frac * (nx - x), y + frac * (ny - y), std::nullopt});
    t = travel_end;
    zone = next;
    x = nx;
    y = ny;
  }
  return segments;
}

std::pair<double, double> position_at(const std::vector<TrajectorySegment>& traj,
                                      std::uint64_t t_ms) {
  if (traj.empty()) return {0.0, 0.0};
  auto it = std::upper_bound(traj.begin(), traj.end(), t_ms,
                             [](std::uint64_t t, const TrajectorySegment& s) { return t < s.t1_ms; });
  if (it == traj.end()) {
    const TrajectorySegment& last = traj.back();
    return {last.x1, last.y1};
  }
  const TrajectorySegment& seg = *it;
  if (t_ms < seg.t0_ms) return {seg.x0, seg.y0};
  if (seg.t1_ms == seg.t0_ms) return {seg.x0, seg.y0};
  const double u = static_cast<double>(t_ms - seg.t0_ms) / static_cast<double>(seg.t1_ms - seg.t0_ms);
  return {seg.x0 + u * (seg.x1 - seg.x0), seg.y0 + u * (seg.y1 - seg.y0)};
}

namespace {

// Inclusive tick-index ranges during which a trajectory stays within one
// totem's disc. Ticks fire at k * itv_ms for k * itv_ms < duration_ms.
using TickInterval = std::pair<std::uint64_t, std::uint64_t>;

void append_interval(std::vector<TickInterval>& out, std::uint64_t k0, std::uint64_t k1) {
  if (k0 > k1) return;
  if (!out.empty() && out.back().second + 1 >= k0) {
    out.back().second = std::max(out.back().second, k1);
    return;
  }
  out.emplace_back(k0, k1);
}

std::vector<TickInterval> in_range_ticks(const std::vector<TrajectorySegment>& traj,
                                         double cx, double cy, double range,
                                         std::uint64_t itv_ms, std::uint64_t duration_ms) {
  std::vector<TickInterval> out;
  const std::uint64_t last_tick = (duration_ms - 1) / itv_ms;
  auto clamp_ticks = [&](double enter_ms, double exit_ms) {
    if (exit_ms < enter_ms) return;
    const double k0d = std::ceil(enter_ms / static_cast<double>(itv_ms) - 1e-9);
    const double k1d = std::floor(exit_ms / static_cast<double>(itv_ms) + 1e-9);
    if (k1d < 0.0 || k0d > k1d) return;
    const auto k0 = static_cast<std::uint64_t>(std::max(0.0, k0d));
    auto k1 = static_cast<std::uint64_t>(k1d);
    k1 = std::min(k1, last_tick);
    if (k0 > k1) return;
    append_interval(out, k0, k1);
  };

  for (const TrajectorySegment& seg : traj) {
    if (seg.t1_ms <= seg.t0_ms) continue;
    const double t0 = static_cast<double>(seg.t0_ms);
    const double t1 = static_cast<double>(seg.t1_ms);
    const double vx = seg.x1 - seg.x0;
    const double vy = seg.y1 - seg.y0;
    const double dx = seg.x0 - cx;
    const double dy = seg.y0 - cy;
    const double a = vx * vx + vy * vy;
    if (a < 1e-12) {  // stationary segment
      if (std::hypot(dx, dy) <= range) clamp_ticks(t0, t1 - 1.0);
      continue;
    }
    // |D + u V|^2 <= r^2 over u in [0, 1]
    const double b = 2.0 * (dx * vx + dy * vy);
    const double c = dx * dx + dy * dy - range * range;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    double u0 = (-b - sq) / (2.0 * a);
    double u1 = (-b + sq) / (2.0 * a);
    u0 = std::max(u0, 0.0);
    u1 = std::min(u1, 1.0);
    if (u1 < u0) continue;
    const double span = t1 - t0;
    clamp_ticks(t0 + u0 * span, std::min(t0 + u1 * span, t1 - 1.0));
  }
  return out;
}

struct EngineDevice {
  DeviceState state;
  std::vector<TrajectorySegment> traj;
  std::size_t seg_cursor = 0;
  std::vector<std::vector<TickInterval>> totem_ticks;  // per totem
  std::vector<std::size_t> totem_cursor;
  std::set<SlotIndex> matched;
};

struct PendingPublication {
  std::uint64_t t_ms = 0;
  PositiveDisclosure disclosure;
};

}  // namespace

SimOutput run(const SimConfig& config) {
  validate(config);

  SimOutput out;
  out.config = config;

  const std::uint64_t seed = config.seed;
  const auto itv_ms = static_cast<std::uint64_t>(std::llround(config.broadcast_interval_s * 1000.0));
  const std::uint64_t slot_ms = static_cast<std::uint64_t>(config.slot_len_s) * 1000ull;
  const std::uint64_t duration_ms = config.duration_s * 1000ull;
  const std::uint64_t tick_count = (duration_ms + itv_ms - 1) / itv_ms;
  const std::uint32_t n_devices = config.devices.count;
  const std::size_t n_totems = config.totems.size();
  const bool encrypted_wire = wire_encrypted(config.mode);
  const bool central = config.mode == ProtocolMode::centralized;

  // --- zones and mobility ---
  MobilityModel mobility;
  for (const TotemSpec& t : config.totems) {
    mobility.zones.push_back(Zone{t.id, t.x_m, t.y_m, true});
  }
  for (const PlaceSpec& p : config.places) {
    mobility.zones.push_back(Zone{p.id, p.x_m, p.y_m, false});
  }
  mobility.dwell_mean_s = config.devices.dwell_mean_s;
  mobility.speed_mps = config.devices.speed_mps;
  if (config.devices.transition.empty()) {
    const std::size_t n = mobility.zones.size();
    mobility.transition.assign(n, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  } else {
    mobility.transition = config.devices.transition;
  }
  validate(mobility);

  // --- keys ---
  Rng key_rng(splitmix64(seed ^ kKeyStreamTag));
  std::vector<EngineDevice> devices(n_devices);
  for (std::uint32_t d = 0; d < n_devices; ++d) {
    DeviceState& st = devices[d].state;
    key_rng.fill(st.key.key.data(), st.key.key.size());
    st.key.owner = d;
    st.device_id = d;
    st.risk_threshold_s = config.risk_threshold_s;
    st.lookback_days = config.lookback_days;
    st.slot_len_s = config.slot_len_s;
  }
  out.authority_keys = generate_totem_keypair(key_rng);
  std::vector<TotemState> totems(n_totems);
  TotemDirectory directory;
  for (std::size_t i = 0; i < n_totems; ++i) {
    const TotemSpec& spec = config.totems[i];
    TotemState& t = totems[i];
    t.totem_id = spec.id;
    t.x_m = spec.x_m;
    t.y_m = spec.y_m;
    t.radio_range_m = spec.radio_range_m;
    t.mode = config.mode;
    t.slot_len_s = config.slot_len_s;
    t.encrypt_at_rest = config.encrypt_at_rest;
    t.keypair = generate_totem_keypair(key_rng);
    directory.entries[spec.id] = t.keypair->public_key;
  }
  if (encrypted_wire) {
    for (EngineDevice& d : devices) d.state.directory = &directory;
  }

  // --- trajectories, per-totem tick intervals, presence ---
  for (std::uint32_t d = 0; d < n_devices; ++d) {
    Rng traj_rng(splitmix64(seed ^ kMobilityTag ^ (0x1000000ull + d)));
    const std::uint32_t start = config.devices.initial_zone.empty()
                                    ? static_cast<std::uint32_t>(traj_rng.below(mobility.zones.size()))
                                    : config.devices.initial_zone[d];
    devices[d].traj = build_trajectory(mobility, start, duration_ms, traj_rng);
    devices[d].totem_ticks.resize(n_totems);
    devices[d].totem_cursor.assign(n_totems, 0);
    for (std::size_t ti = 0; ti < n_totems; ++ti) {
      devices[d].totem_ticks[ti] = in_range_ticks(devices[d].traj, totems[ti].x_m, totems[ti].y_m,
                                                  totems[ti].radio_range_m, itv_ms, duration_ms);
    }
  }

  out.truth.trajectories.reserve(n_devices);
  for (const EngineDevice& d : devices) {
    out.truth.trajectories.push_back(d.traj);
    out.truth.device_keys.push_back(d.state.key);
  }

  // presence(device, totem, slot): derived from trajectory + ranges on the
  // emission-tick grid, before any protocol activity.
  std::vector<std::vector<std::vector<SlotIndex>>> presence_slots(
      n_devices, std::vector<std::vector<SlotIndex>>(n_totems));
  for (std::uint32_t d = 0; d < n_devices; ++d) {
    for (std::size_t ti = 0; ti < n_totems; ++ti) {
      std::set<SlotIndex> slots;
      for (const TickInterval& iv : devices[d].totem_ticks[ti]) {
        const SlotIndex s0 = slot_of_ms(iv.first * itv_ms, config.slot_len_s);
        const SlotIndex s1 = slot_of_ms(iv.second * itv_ms, config.slot_len_s);
        for (SlotIndex s = s0; s <= s1; ++s) slots.insert(s);
      }
      presence_slots[d][ti].assign(slots.begin(), slots.end());
      for (SlotIndex s : slots) out.truth.presence.insert({d, totems[ti].totem_id, s});
    }
  }

  // --- adversary setup ---
  const AdversarySpec& adv = config.adversary;
  std::vector<bool> is_target(n_devices, false);
  std::map<std::uint32_t, std::size_t> target_index;
  for (std::uint32_t t : adv.targets) {
    if (target_index.count(t)) continue;
    is_target[t] = true;
    target_index[t] = out.target_captures.size();
    out.target_captures.push_back(TargetCapture{"device-" + std::to_string(t), {}});
  }
  std::vector<std::size_t> coverage_totem_idx;
  if (adv.coverage == CoverageKind::totems) {
    for (const std::string& id : adv.coverage_totems) {
      for (std::size_t ti = 0; ti < n_totems; ++ti) {
        if (totems[ti].totem_id == id) coverage_totem_idx.push_back(ti);
      }
    }
  }
  auto covered = [&](double x, double y) {
    switch (adv.coverage) {
      case CoverageKind::global: return true;
      case CoverageKind::none: return false;
      case CoverageKind::totems:
        for (std::size_t ti : coverage_totem_idx) {
          if (distance(x, y, totems[ti].x_m, totems[ti].y_m) <= totems[ti].radio_range_m) {
            return true;
          }
        }
        return false;
    }
    return false;
  };
  auto observe = [&](const std::vector<std::uint8_t>& payload, std::uint64_t t_ms, double x,
                     double y, std::optional<std::uint32_t> emitter) {
    const bool targeted = emitter && is_target[*emitter];
    if (!targeted && !covered(x, y)) return;
    EavesdropEntry entry{payload, t_ms, x, y};
    out.eavesdrop.entries.push_back(entry);
    if (targeted) out.target_captures[target_index[*emitter]].entries.push_back(std::move(entry));
  };

  std::vector<std::size_t> replay_capture_idx;  // capture totem index per directive
  std::vector<std::size_t> replay_target_idx;
  for (const ReplayDirective& r : adv.replays) {
    for (std::size_t ti = 0; ti < n_totems; ++ti) {
      if (totems[ti].totem_id == r.capture_totem) replay_capture_idx.push_back(ti);
      if (totems[ti].totem_id == r.replay_totem) replay_target_idx.push_back(ti);
    }
  }
  std::set<Beacon> injected_beacons;  // ground truth for replay experiments

  // --- authority / protocol state ---
  AuthorityStore store;
  Rng session_rng(splitmix64(seed ^ kSessionTag));
  std::map<std::string, std::pair<double, double>> totem_positions;
  for (const TotemSpec& t : config.totems) totem_positions[t.id] = {t.x_m, t.y_m};
  std::vector<const TotemState*> reachable_totems;
  for (std::size_t ti = 0; ti < n_totems; ++ti) {
    if (config.totems[ti].reachable) reachable_totems.push_back(&totems[ti]);
    else out.run_report.unreachable_totems.push_back(config.totems[ti].id);
  }

  struct DiagEvent {
    std::uint64_t t_ms;
    std::uint32_t device;
    std::uint64_t t_s;
  };
  std::vector<DiagEvent> diagnoses;
  for (const InfectionSpec& inf : config.infections) {
    diagnoses.push_back(DiagEvent{inf.diagnosis_time_s * 1000ull, inf.device, inf.diagnosis_time_s});
  }
  std::stable_sort(diagnoses.begin(), diagnoses.end(),
                   [](const DiagEvent& a, const DiagEvent& b) { return a.t_ms < b.t_ms; });

  std::deque<PendingPublication> pub_queue;
  std::size_t diag_cursor = 0;
  std::uint64_t next_flush_slot = 1;  // flush records of slot s at (s+1)*slot_ms

  auto flush_totems = [&]() {
    for (std::size_t ti = 0; ti < n_totems; ++ti) {
      if (!config.totems[ti].reachable) continue;
      ingest_records(store, flush_centralized(totems[ti]));
    }
  };

  auto run_publication = [&](PendingPublication& pub) {
    const std::uint64_t t_pub_s = pub.t_ms / 1000ull;
    std::set<Beacon> flagged;
    if (central && config.fraud_filter) {
      flagged = detect_fraud(store, config.v_max_mps, totem_positions, config.slot_len_s);
      out.fraud_flagged.insert(flagged.begin(), flagged.end());
    }
    PublishedList list =
        central ? reconcile_centralized(store, pub.disclosure, config.epsilon_slots, flagged, t_pub_s)
                : reconcile_decentralized(pub.disclosure, reachable_totems, config.epsilon_slots,
                                          t_pub_s);
    Publication publication;
    publication.disclosure = std::move(pub.disclosure);
    publication.list = std::move(list);
    publication.shuffle_seed = splitmix64(seed ^ kPublishTag ^ out.publications.size());
    publication.serialized = publish(publication.list, publication.shuffle_seed);

    for (EngineDevice& dev : devices) {
      const ExposureReport r = match_published(dev.state, publication.list, t_pub_s);
      dev.matched.insert(r.matched_slots.begin(), r.matched_slots.end());
    }
    out.publications.push_back(std::move(publication));
  };

  auto process_diagnosis = [&](const DiagEvent& ev) {
    const PositiveDisclosure d = disclose_positive(devices[ev.device].state, ev.t_s);
    // hospital pass-through to the authority
    if (!ingest_positive(store, d, ev.t_s)) return;
    const SlotIndex tau_max = slot_of(ev.t_s, config.slot_len_s);
    const std::uint64_t window_closed_ms =
        (tau_max + config.epsilon_slots + 1) * slot_ms;
    pub_queue.push_back(PendingPublication{std::min(window_closed_ms, duration_ms), d});
  };

  // Events due up to and including `upto`, in (time, kind) order: slot
  // flushes, then diagnoses, then publications.
  auto process_due = [&](std::uint64_t upto) {
    while (true) {
      const std::uint64_t t_flush = central ? next_flush_slot * slot_ms : UINT64_MAX;
      const std::uint64_t t_diag =
          diag_cursor < diagnoses.size() ? diagnoses[diag_cursor].t_ms : UINT64_MAX;
      const std::uint64_t t_pub = !pub_queue.empty() ? pub_queue.front().t_ms : UINT64_MAX;
      const std::uint64_t t_min = std::min({t_flush, t_diag, t_pub});
      if (t_min > upto) break;
      if (t_flush == t_min) {
        flush_totems();
        ++next_flush_slot;
      } else if (t_diag == t_min) {
        process_diagnosis(diagnoses[diag_cursor++]);
      } else {
        PendingPublication pub = std::move(pub_queue.front());
        pub_queue.pop_front();
        run_publication(pub);
      }
    }
  };

  // --- main tick loop ---
  std::vector<std::size_t> in_range;  // reused scratch, totem indices
  for (std::uint64_t k = 0; k < tick_count; ++k) {
    const std::uint64_t t_ms = k * itv_ms;
    process_due(t_ms);

    for (std::uint32_t d = 0; d < n_devices; ++d) {
      EngineDevice& dev = devices[d];
      while (dev.seg_cursor + 1 < dev.traj.size() && dev.traj[dev.seg_cursor].t1_ms <= t_ms) {
        ++dev.seg_cursor;
      }
      const TrajectorySegment& seg = dev.traj[dev.seg_cursor];
      double x = seg.x0, y = seg.y0;
      if (seg.t1_ms > seg.t0_ms && t_ms >= seg.t0_ms) {
        const double u =
            static_cast<double>(t_ms - seg.t0_ms) / static_cast<double>(seg.t1_ms - seg.t0_ms);
        x = seg.x0 + u * (seg.x1 - seg.x0);
        y = seg.y0 + u * (seg.y1 - seg.y0);
      }

      in_range.clear();
      for (std::size_t ti = 0; ti < n_totems; ++ti) {
        auto& cur = dev.totem_cursor[ti];
        const auto& ivs = dev.totem_ticks[ti];
        while (cur < ivs.size() && ivs[cur].second < k) ++cur;
        if (cur < ivs.size() && ivs[cur].first <= k) in_range.push_back(ti);
      }

      if (!encrypted_wire) {
        Transmission tx = broadcast_tick(dev.state, t_ms, config.mode);
        ++out.run_report.transmissions;
        observe(tx.payload, t_ms, x, y, d);
        for (std::size_t ti : in_range) receive_beacon(totems[ti], tx, t_ms);
        // replay directives watch the victim's cleartext stream
        for (std::size_t ri = 0; ri < adv.replays.size(); ++ri) {
          const ReplayDirective& r = adv.replays[ri];
          if (r.victim_device != d) continue;
          if (t_ms < r.start_s * 1000ull || t_ms > r.end_s * 1000ull) continue;
          const TotemState& cap = totems[replay_capture_idx[ri]];
          if (distance(x, y, cap.x_m, cap.y_m) > cap.radio_range_m) continue;
          if (!covered(x, y) && !is_target[d]) continue;  // must have been captured
          TotemState& dst = totems[replay_target_idx[ri]];
          EavesdropEntry captured{tx.payload, t_ms, x, y};
          Transmission injected = replay_inject(captured);
          receive_beacon(dst, injected, t_ms);
          observe(injected.payload, t_ms, dst.x_m, dst.y_m, std::nullopt);
          ++out.run_report.replays_injected;
          Beacon b;
          std::copy(tx.payload.begin(), tx.payload.end(), b.bytes.begin());
          injected_beacons.insert(b);
        }
      } else {
        for (std::size_t ti : in_range) {
          Transmission tx =
              broadcast_tick_encrypted(dev.state, t_ms, totems[ti].totem_id, session_rng);
          ++out.run_report.transmissions;
          observe(tx.payload, t_ms, x, y, d);
          receive_beacon(totems[ti], tx, t_ms);
          for (std::size_t ri = 0; ri < adv.replays.size(); ++ri) {
            const ReplayDirective& r = adv.replays[ri];
            if (r.victim_device != d) continue;
            if (t_ms < r.start_s * 1000ull || t_ms > r.end_s * 1000ull) continue;
            const TotemState& cap = totems[replay_capture_idx[ri]];
            if (distance(x, y, cap.x_m, cap.y_m) > cap.radio_range_m) continue;
            if (!covered(x, y) && !is_target[d]) continue;
            TotemState& dst = totems[replay_target_idx[ri]];
            EavesdropEntry captured{tx.payload, t_ms, x, y};
            Transmission injected = replay_inject(captured);
            receive_beacon(dst, injected, t_ms);
            observe(injected.payload, t_ms, dst.x_m, dst.y_m, std::nullopt);
            ++out.run_report.replays_injected;
          }
        }
      }
    }
  }

  // run end: outstanding boundaries and diagnoses first, then the final
  // partial slot, then publications whose windows were clamped to run end.
  process_due(duration_ms > 0 ? duration_ms - 1 : 0);
  if (central) flush_totems();
  process_due(duration_ms);

  out.injected_beacons = std::move(injected_beacons);

  // --- collect records ---
  if (central) {
    out.records = store.records;
  } else {
    for (const TotemState* t : reachable_totems) {
      for (const auto& [slot, beacon] : t->local_store) {
        out.records.push_back(BeaconRecord{t->totem_id, slot, beacon});
      }
    }
  }
  out.run_report.records_stored = out.records.size();
  for (const TotemState& t : totems) {
    out.run_report.drop_counts[t.totem_id] = t.drop_count;
    out.at_rest_images[t.totem_id] = at_rest_image(t, &out.authority_keys.public_key);
  }

  // --- per-device exposure reports ---
  for (std::uint32_t d = 0; d < n_devices; ++d) {
    ExposureReport r;
    r.matched_slots = devices[d].matched;
    r.exposure_seconds = r.matched_slots.size() * static_cast<std::uint64_t>(config.slot_len_s);
    r.notified = r.exposure_seconds >= config.risk_threshold_s;
    if (r.notified) out.run_report.notified_devices.push_back(d);
    out.reports[d] = std::move(r);
  }

  // --- ground truth: protocol-mirroring traceable slots ---
  const std::uint64_t lookback_s = static_cast<std::uint64_t>(config.lookback_days) * 86400ull;
  for (const DiagEvent& ev : diagnoses) {
    const std::uint64_t from_s = ev.t_s > lookback_s ? ev.t_s - lookback_s : 0;
    const SlotIndex from_a = slot_of(from_s, config.slot_len_s);
    const SlotIndex to_a = slot_of(ev.t_s, config.slot_len_s);
    const std::uint64_t t_pub_s =
        std::min((to_a + config.epsilon_slots + 1) * static_cast<std::uint64_t>(config.slot_len_s),
                 config.duration_s);
    const std::uint64_t match_from_s = t_pub_s > lookback_s ? t_pub_s - lookback_s : 0;
    const SlotIndex match_lo = slot_of(match_from_s, config.slot_len_s);
    const SlotIndex match_hi = slot_of(t_pub_s, config.slot_len_s);

    for (std::uint32_t b = 0; b < n_devices; ++b) {
      auto& slots = out.truth.traceable_slots[b];
      if (b == ev.device) {
        // own disclosed beacons are always published
        for (SlotIndex s = std::max(from_a, match_lo); s <= std::min(to_a, match_hi); ++s) {
          slots.insert(s);
        }
        continue;
      }
      for (std::size_t ti = 0; ti < n_totems; ++ti) {
        const auto& pres_b = presence_slots[b][ti];
        const auto& pres_a = presence_slots[ev.device][ti];
        if (pres_b.empty() || pres_a.empty()) continue;
        for (SlotIndex sb : pres_b) {
          if (sb < match_lo || sb > match_hi) continue;
          const SlotIndex lo =
              std::max<SlotIndex>(sb >= config.epsilon_slots ? sb - config.epsilon_slots : 0, from_a);
          const SlotIndex hi = std::min<SlotIndex>(sb + config.epsilon_slots, to_a);
          if (lo > hi) continue;
          auto it = std::lower_bound(pres_a.begin(), pres_a.end(), lo);
          if (it != pres_a.end() && *it <= hi) slots.insert(sb);
        }
      }
    }
  }
  for (std::uint32_t d = 0; d < n_devices; ++d) {
    auto it = out.truth.traceable_slots.find(d);
    const std::uint64_t exposure =
        it == out.truth.traceable_slots.end()
            ? 0
            : it->second.size() * static_cast<std::uint64_t>(config.slot_len_s);
    if (exposure >= config.risk_threshold_s) {
      out.truth.true_contacts.insert(d);
    }
  }

  // --- ground truth: physical co-dwell (coverage misses) ---
  // Mirrors the traceable rule exactly, with "dwelling within contact radius"
  // in place of "recorded at a totem": the difference between the two contact
  // sets is precisely what happened outside coverage.
  {
    const std::size_t n_zones = mobility.zones.size();
    // dwell slots per device per zone, on the emission-tick grid
    std::vector<std::vector<std::vector<SlotIndex>>> zone_presence(
        n_devices, std::vector<std::vector<SlotIndex>>(n_zones));
    std::vector<std::vector<std::vector<TickInterval>>> dwell(
        n_devices, std::vector<std::vector<TickInterval>>(n_zones));
    const std::uint64_t last_tick = (duration_ms - 1) / itv_ms;
    for (std::uint32_t d = 0; d < n_devices; ++d) {
      for (const TrajectorySegment& seg : devices[d].traj) {
        if (!seg.zone || seg.t1_ms <= seg.t0_ms) continue;
        const std::uint64_t k0 = (seg.t0_ms + itv_ms - 1) / itv_ms;
        const std::uint64_t k1 = std::min((seg.t1_ms - 1) / itv_ms, last_tick);
        if (k0 > k1) continue;
        append_interval(dwell[d][*seg.zone], k0, k1);
      }
      for (std::size_t z = 0; z < n_zones; ++z) {
        std::set<SlotIndex> slots;
        for (const TickInterval& iv : dwell[d][z]) {
          const SlotIndex s0 = slot_of_ms(iv.first * itv_ms, config.slot_len_s);
          const SlotIndex s1 = slot_of_ms(iv.second * itv_ms, config.slot_len_s);
          for (SlotIndex s = s0; s <= s1; ++s) slots.insert(s);
        }
        zone_presence[d][z].assign(slots.begin(), slots.end());
      }
    }
    auto zones_close = [&](std::size_t za, std::size_t zb) {
      return distance(mobility.zones[za].x_m, mobility.zones[za].y_m, mobility.zones[zb].x_m,
                      mobility.zones[zb].y_m) <= config.contact_radius_m;
    };

    // symmetric raw co-dwell exposure, for reporting
    for (std::uint32_t a = 0; a < n_devices; ++a) {
      for (std::uint32_t b = a + 1; b < n_devices; ++b) {
        std::set<SlotIndex> shared;
        for (std::size_t za = 0; za < n_zones; ++za) {
          if (zone_presence[a][za].empty()) continue;
          for (std::size_t zb = 0; zb < n_zones; ++zb) {
            if (zone_presence[b][zb].empty() || !zones_close(za, zb)) continue;
            std::size_t i = 0, j = 0;
            const auto& pa = zone_presence[a][za];
            const auto& pb = zone_presence[b][zb];
            while (i < pa.size() && j < pb.size()) {
              if (pa[i] == pb[j]) {
                shared.insert(pa[i]);
                ++i;
                ++j;
              } else if (pa[i] < pb[j]) {
                ++i;
              } else {
                ++j;
              }
            }
          }
        }
        if (!shared.empty()) {
          out.truth.physical_exposure_s[{a, b}] =
              shared.size() * static_cast<std::uint64_t>(config.slot_len_s);
        }
      }
    }

    // protocol-mirroring contact decision per diagnosis window
    std::map<std::uint32_t, std::set<SlotIndex>> physical_slots;
    for (const DiagEvent& ev : diagnoses) {
      const std::uint64_t from_s = ev.t_s > lookback_s ? ev.t_s - lookback_s : 0;
      const SlotIndex from_a = slot_of(from_s, config.slot_len_s);
      const SlotIndex to_a = slot_of(ev.t_s, config.slot_len_s);
      const std::uint64_t t_pub_s = std::min(
          (to_a + config.epsilon_slots + 1) * static_cast<std::uint64_t>(config.slot_len_s),
          config.duration_s);
      const std::uint64_t match_from_s = t_pub_s > lookback_s ? t_pub_s - lookback_s : 0;
      const SlotIndex match_lo = slot_of(match_from_s, config.slot_len_s);
      const SlotIndex match_hi = slot_of(t_pub_s, config.slot_len_s);

      for (std::uint32_t b = 0; b < n_devices; ++b) {
        if (b == ev.device) continue;
        auto& slots = physical_slots[b];
        for (std::size_t zb = 0; zb < n_zones; ++zb) {
          const auto& pres_b = zone_presence[b][zb];
          if (pres_b.empty()) continue;
          for (std::size_t za = 0; za < n_zones; ++za) {
            if (!zones_close(za, zb)) continue;
            const auto& pres_a = zone_presence[ev.device][za];
            if (pres_a.empty()) continue;
            for (SlotIndex sb : pres_b) {
              if (sb < match_lo || sb > match_hi) continue;
              const SlotIndex lo = std::max<SlotIndex>(
                  sb >= config.epsilon_slots ? sb - config.epsilon_slots : 0, from_a);
              const SlotIndex hi = std::min<SlotIndex>(sb + config.epsilon_slots, to_a);
              if (lo > hi) continue;
              auto it = std::lower_bound(pres_a.begin(), pres_a.end(), lo);
              if (it != pres_a.end() && *it <= hi) slots.insert(sb);
            }
          }
        }
      }
    }
    for (const auto& [b, slots] : physical_slots) {
      if (slots.size() * static_cast<std::uint64_t>(config.slot_len_s) >=
          config.risk_threshold_s) {
        out.truth.physical_contacts_of_diagnosed.insert(b);
      }
    }
  }

  // --- offline attacks over the collected artifacts ---
  std::vector<PublishedList> lists;
  lists.reserve(out.publications.size());
  for (const Publication& p : out.publications) lists.push_back(p.list);
  double cluster_radius = 0.0;
  for (const TotemSpec& t : config.totems) cluster_radius = std::max(cluster_radius, t.radio_range_m);
  if (cluster_radius == 0.0) cluster_radius = config.contact_radius_m;
  Rng pinpoint_rng(adv.seed ? *adv.seed : splitmix64(seed ^ kAdversaryTag));
  out.inferences = infer_health_status(out.eavesdrop, lists, out.target_captures, cluster_radius,
                                       config.epsilon_slots, config.slot_len_s, pinpoint_rng);
  out.recovered_trajectory = recover_trajectory(out.eavesdrop, lists, config.slot_len_s);

  return out;
}

}  // namespace iotrace
