#pragma once

// User-side state machine. Transmit-only by construction: there is no
// operation here that consumes another device's beacon, and the state keeps
// zero contact-list entries — the own-beacon history is regenerated from the
// key whenever it is needed.

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "iotrace/protocol.hpp"
#include "iotrace/secure_channel.hpp"

namespace iotrace {

struct DeviceState {
  DeviceKey key;
  std::uint32_t device_id = 0;  // simulation-internal, never leaves this layer
  std::uint32_t risk_threshold_s = 900;
  std::uint32_t lookback_days = 14;
  std::uint32_t slot_len_s = 600;

  // Privacy-enhanced wire only. Sessions are re-keyed per slot and bounded by
  // the directory size, never by the number of encounters.
  const TotemDirectory* directory = nullptr;
  std::map<std::string, Session> sessions;
};

struct ExposureReport {
  std::set<SlotIndex> matched_slots;
  std::uint64_t exposure_seconds = 0;
  bool notified = false;
};

// Cleartext modes: the payload is the current slot's beacon. Throws if called
// with the privacy-enhanced mode; that wire needs a totem session, see below.
Transmission broadcast_tick(DeviceState& state, std::uint64_t now_ms, ProtocolMode mode);

// Privacy-enhanced wire, one transmission per in-range totem. Establishes or
// re-keys the per-(totem, slot) session; an establishment emission carries the
// key encapsulation in front of the first ciphertext.
Transmission broadcast_tick_encrypted(DeviceState& state, std::uint64_t now_ms,
                                      const std::string& totem_id, Rng& rng);

// Beacons for [diagnosis_time - lookback, diagnosis_time], regenerated from
// the key; identical to what was broadcast over that period.
PositiveDisclosure disclose_positive(const DeviceState& state, std::uint64_t diagnosis_time_s);

// Regenerates own beacons over the lookback window ending at `now_s` and
// intersects them with the published set. Pure; no state is mutated.
ExposureReport match_published(const DeviceState& state, const PublishedList& list,
                               std::uint64_t now_s);

}  // namespace iotrace
