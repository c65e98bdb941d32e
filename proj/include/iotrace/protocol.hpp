#pragma once

// Domain types shared by the device / totem / authority state machines.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "iotrace/core.hpp"

namespace iotrace {

enum class ProtocolMode { centralized, decentralized, privacy_enhanced };

// privacy_enhanced layers the encrypted wire on top of decentralized storage.
inline bool wire_encrypted(ProtocolMode m) { return m == ProtocolMode::privacy_enhanced; }
inline bool storage_decentralized(ProtocolMode m) { return m != ProtocolMode::centralized; }

const char* to_string(ProtocolMode m);
std::optional<ProtocolMode> mode_from_string(std::string_view s);

// One over-the-air emission: exactly the bytes an eavesdropper sees.
// Encrypted transmissions are usable by a single totem; `addressed_totem`
// is the simulator's delivery hint, not part of the payload bytes.
struct Transmission {
  std::vector<std::uint8_t> payload;
  std::optional<std::string> addressed_totem;
};

// The storage tuple <totem-ID, time-slot, beacon>. No device identity, no
// RSSI, no geographic payload.
struct BeaconRecord {
  std::string totem_id;
  SlotIndex slot = 0;
  Beacon beacon;

  auto operator<=>(const BeaconRecord&) const = default;
};

// Ordered (slot, beacon) list a diagnosed device hands to the hospital.
struct PositiveDisclosure {
  std::vector<std::pair<SlotIndex, Beacon>> entries;

  std::set<Beacon> beacon_set() const {
    std::set<Beacon> s;
    for (const auto& [slot, b] : entries) s.insert(b);
    return s;
  }
  bool empty() const { return entries.empty(); }
};

// Flat, unlabeled positive+negative beacon set. Carries no totem id, no slot,
// no labels; serialization order is a seeded shuffle (see authority::publish).
struct PublishedList {
  std::set<Beacon> beacons;
  std::uint64_t published_at_s = 0;
};

}  // namespace iotrace
