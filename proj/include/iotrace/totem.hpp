#pragma once

// Edge IoT node: collects beacons from nearby devices, forwarding them
// (centralized) or storing them locally and answering window queries
// (decentralized / privacy-enhanced).

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "iotrace/protocol.hpp"
#include "iotrace/secure_channel.hpp"

namespace iotrace {

struct TotemState {
  std::string totem_id;
  double x_m = 0.0;
  double y_m = 0.0;
  double radio_range_m = 50.0;
  ProtocolMode mode = ProtocolMode::centralized;
  std::uint32_t slot_len_s = 600;
  bool encrypt_at_rest = false;

  std::optional<TotemKeyPair> keypair;  // privacy-enhanced mode

  // Duplicate (slot, beacon) pairs coalesce to one entry; iteration order is
  // (slot, beacon) lexicographic, which keeps flushes deterministic.
  std::set<std::pair<SlotIndex, Beacon>> local_store;  // decentralized storage
  std::set<std::pair<SlotIndex, Beacon>> pending;      // centralized batch buffer

  std::map<std::uint64_t, crypto::Key16> sessions;  // session_id -> key
  std::uint64_t drop_count = 0;  // undecryptable / malformed payloads
};

// Ingest one over-the-air payload heard at `now_ms`. Decrypts first in
// privacy-enhanced mode; undecryptable payloads bump drop_count and are
// otherwise ignored.
void receive_beacon(TotemState& state, const Transmission& tx, std::uint64_t now_ms);

// Returns and clears the pending batch, (slot, beacon) ordered. Throws unless
// the totem runs in centralized mode.
std::vector<BeaconRecord> flush_centralized(TotemState& state);

// For each positive (tau, b) present in the local store, every stored record
// with slot in [tau - epsilon, tau + epsilon] except b itself; deduplicated,
// (slot, beacon) ordered. Throws in centralized mode.
std::vector<BeaconRecord> query_window(const TotemState& state,
                                       const std::vector<std::pair<SlotIndex, Beacon>>& positives,
                                       std::uint32_t epsilon_slots);

// What a physical-compromise probe reads off the box: the serialized store,
// sealed to the authority key when encrypt_at_rest is set.
std::vector<std::uint8_t> at_rest_image(const TotemState& state,
                                        const crypto::Key32* authority_public);

// Authority-side opener for the sealed image (round-trip checks).
std::optional<std::vector<std::uint8_t>> open_at_rest_image(
    const crypto::Key32& authority_private, std::span<const std::uint8_t> image);

}  // namespace iotrace
