#pragma once

// Executable threat model: eavesdrop logs, the health-status and location
// attacks, and the replay injector.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iotrace/protocol.hpp"
#include "iotrace/rng.hpp"

namespace iotrace {

// One observed over-the-air payload, tagged with a timestamp and the
// geographic location where it was recorded.
struct EavesdropEntry {
  std::vector<std::uint8_t> payload;
  std::uint64_t t_ms = 0;
  double x_m = 0.0;
  double y_m = 0.0;
};

struct EavesdropLog {
  std::vector<EavesdropEntry> entries;
};

// Payloads the targeted eavesdropper captured next to one known victim.
struct TargetCapture {
  std::string target_id;
  std::vector<EavesdropEntry> entries;
};

struct TargetInference {
  std::string target_id;
  bool positive = false;
  double confidence = 0.0;            // 1/k for a hit
  std::uint64_t cluster_k = 0;
  std::optional<Beacon> matched;      // first target beacon found in a list
  std::optional<Beacon> pinpoint;     // uniform guess at the cluster's positive
};

struct TrajectoryPoint {
  double x_m = 0.0;
  double y_m = 0.0;
  SlotIndex slot = 0;
  std::vector<Beacon> beacons;  // published beacons observed there, sorted
};

// Health-status attack. A target is positive iff one of its captured payloads
// appears (as a plaintext beacon) in a published list; confidence is 1/k with
// k the size of the publication cluster reconstructed around that sighting —
// log entries within colocate_radius and +-epsilon slots whose beacons are
// published. Ciphertext payloads never match anything.
std::vector<TargetInference> infer_health_status(const EavesdropLog& log,
                                                 const std::vector<PublishedList>& lists,
                                                 const std::vector<TargetCapture>& targets,
                                                 double colocate_radius_m,
                                                 std::uint32_t epsilon_slots,
                                                 std::uint32_t slot_len_s, Rng& pinpoint_rng);

// Location attack: every (location, slot) where a published beacon was heard
// over the air, grouped per location/slot with the diluting beacon set.
std::vector<TrajectoryPoint> recover_trajectory(const EavesdropLog& log,
                                                const std::vector<PublishedList>& lists,
                                                std::uint32_t slot_len_s);

// Re-emits a captured payload verbatim; the simulator delivers it at the
// target totem like any broadcast.
Transmission replay_inject(const EavesdropEntry& captured);

}  // namespace iotrace
