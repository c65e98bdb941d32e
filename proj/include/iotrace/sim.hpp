#pragma once

// Deterministic discrete-event engine: zone mobility over a field of totems,
// broadcast delivery, diagnosis events, protocol execution in the configured
// mode, adversary placement. Identical (config, seed) gives bit-identical
// output.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "iotrace/adversary.hpp"
#include "iotrace/authority.hpp"
#include "iotrace/device.hpp"
#include "iotrace/protocol.hpp"
#include "iotrace/rng.hpp"
#include "iotrace/totem.hpp"

namespace iotrace {

// Config or input-file problem; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct TotemSpec {
  std::string id;
  double x_m = 0.0;
  double y_m = 0.0;
  double radio_range_m = 50.0;
  bool reachable = true;
};

// A meeting place with no totem: co-presence there is invisible to the
// protocol and shows up as a coverage miss in the metrics.
struct PlaceSpec {
  std::string id;
  double x_m = 0.0;
  double y_m = 0.0;
};

struct DeviceSpec {
  std::uint32_t count = 0;
  double speed_mps = 1.5;
  double dwell_mean_s = 1800.0;
  // Row-stochastic matrix over zones (totems then places); empty = uniform.
  std::vector<std::vector<double>> transition;
  std::vector<std::uint32_t> initial_zone;  // empty = seeded uniform draw
};

struct InfectionSpec {
  std::uint32_t device = 0;
  std::uint64_t diagnosis_time_s = 0;
};

struct ReplayDirective {
  std::uint32_t victim_device = 0;
  std::string capture_totem;
  std::string replay_totem;
  std::uint64_t start_s = 0;
  std::uint64_t end_s = 0;
};

enum class CoverageKind { none, global, totems };

struct AdversarySpec {
  CoverageKind coverage = CoverageKind::none;
  std::vector<std::string> coverage_totems;
  std::vector<std::uint32_t> targets;
  std::vector<ReplayDirective> replays;
  std::optional<std::uint64_t> seed;  // pinpoint draws; defaults from run seed
};

struct EnergySpec {
  double tx_power_mw = 31.5;
  double tx_time_per_beacon_s = 0.0008667;
  double rx_power_mw = 39.9;
  double scan_duty_cycle = 0.5;
  double beacon_interval_s = 0.5;
  std::uint32_t beacon_size_B = 16;
  double crypto_ms_per_day = 23.3652;
};

struct SimConfig {
  std::uint64_t seed = 0;
  ProtocolMode mode = ProtocolMode::centralized;
  std::uint32_t slot_len_s = 600;
  double broadcast_interval_s = 0.5;
  std::uint32_t epsilon_slots = 1;
  std::uint32_t risk_threshold_s = 900;
  std::uint32_t lookback_days = 14;
  std::uint64_t duration_s = 0;
  double v_max_mps = 42.0;
  bool fraud_filter = true;  // centralized mode only
  bool encrypt_at_rest = false;
  double contact_radius_m = 10.0;
  std::vector<TotemSpec> totems;
  std::vector<PlaceSpec> places;
  DeviceSpec devices;
  std::vector<InfectionSpec> infections;
  AdversarySpec adversary;
  EnergySpec energy;
};

// Throws ConfigError naming the offending field.
void validate(const SimConfig& config);

// --- Mobility ---------------------------------------------------------------

struct Zone {
  std::string id;
  double x_m = 0.0;
  double y_m = 0.0;
  bool is_totem = false;
};

struct MobilityModel {
  std::vector<Zone> zones;
  std::vector<std::vector<double>> transition;  // row-stochastic
  double dwell_mean_s = 1800.0;
  double speed_mps = 1.5;
};

// Throws ConfigError on a malformed matrix (rows must sum to 1 +- 1e-9) or a
// non-positive dwell mean / speed.
void validate(const MobilityModel& model);

struct MobilityState {
  std::uint32_t zone = 0;
  double x_m = 0.0;
  double y_m = 0.0;
};

// One Markov jump: samples the next zone from the current row and moves the
// device there. Returns the new position.
std::pair<double, double> next_position(MobilityState& state, const MobilityModel& model,
                                        Rng& rng);

// Piecewise-linear trajectory. Dwell segments sit still in a zone; transit
// segments move between zones at model speed (zone = nullopt).
struct TrajectorySegment {
  std::uint64_t t0_ms = 0;
  std::uint64_t t1_ms = 0;  // half-open [t0, t1)
  double x0 = 0.0, y0 = 0.0;
  double x1 = 0.0, y1 = 0.0;
  std::optional<std::uint32_t> zone;
};

std::vector<TrajectorySegment> build_trajectory(const MobilityModel& model,
                                                std::uint32_t start_zone,
                                                std::uint64_t duration_ms, Rng& rng);

std::pair<double, double> position_at(const std::vector<TrajectorySegment>& traj,
                                      std::uint64_t t_ms);

// --- Ground truth and output -------------------------------------------------

struct GroundTruth {
  std::vector<std::vector<TrajectorySegment>> trajectories;           // per device
  // Per-device PRF keys. Oracle material for tests; write_outputs never
  // serializes them and they appear in no wire or published artifact.
  std::vector<DeviceKey> device_keys;
  std::set<std::tuple<std::uint32_t, std::string, SlotIndex>> presence;  // device at totem in slot
  // Slots a candidate device would legitimately match against the diagnosed
  // set (protocol-mirroring); key = candidate device.
  std::map<std::uint32_t, std::set<SlotIndex>> traceable_slots;
  std::set<std::uint32_t> true_contacts;  // traceable exposure >= threshold
  // Symmetric physical co-dwell exposure per pair (a < b), in seconds.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> physical_exposure_s;
  std::set<std::uint32_t> physical_contacts_of_diagnosed;
};

struct Sighting {
  std::string totem_id;
  SlotIndex slot = 0;  // tau of the positive beacon seen there
};

struct Publication {
  PositiveDisclosure disclosure;
  PublishedList list;
  std::uint64_t shuffle_seed = 0;
  std::string serialized;  // exact published.json bytes
};

struct RunReport {
  std::vector<std::string> unreachable_totems;
  std::map<std::string, std::uint64_t> drop_counts;
  std::uint64_t records_stored = 0;
  std::uint64_t transmissions = 0;
  std::uint64_t replays_injected = 0;
  std::vector<std::uint32_t> notified_devices;
};

struct SimOutput {
  SimConfig config;  // resolved (defaults applied)
  GroundTruth truth;
  std::vector<BeaconRecord> records;  // all records stored anywhere during the run
  std::vector<Publication> publications;
  std::map<std::uint32_t, ExposureReport> reports;  // per device
  EavesdropLog eavesdrop;
  std::vector<TargetCapture> target_captures;
  std::vector<TargetInference> inferences;
  std::vector<TrajectoryPoint> recovered_trajectory;
  std::set<Beacon> fraud_flagged;
  std::set<Beacon> injected_beacons;  // ground truth for replay experiments
  // What a physical-compromise probe would read off each totem at run end;
  // sealed to the authority key when encrypt_at_rest is set.
  std::map<std::string, std::vector<std::uint8_t>> at_rest_images;
  TotemKeyPair authority_keys;
  RunReport run_report;
};

SimOutput run(const SimConfig& config);

}  // namespace iotrace
