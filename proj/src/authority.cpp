#include "iotrace/authority.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iotrace/rng.hpp"

namespace iotrace {

void ingest_records(AuthorityStore& store, const std::vector<BeaconRecord>& batch) {
  for (const BeaconRecord& r : batch) {
    const auto key = std::make_pair(r.totem_id, r.slot);
    auto& bucket = store.by_totem_slot[key];
    bool dup = false;
    for (std::uint32_t idx : bucket) {
      if (store.records[idx].beacon == r.beacon) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    const auto idx = static_cast<std::uint32_t>(store.records.size());
    store.records.push_back(r);
    bucket.push_back(idx);
    store.by_beacon[r.beacon].push_back(idx);
  }
}

bool ingest_positive(AuthorityStore& store, const PositiveDisclosure& d,
                     std::uint64_t received_at_s) {
  if (d.empty()) throw std::invalid_argument("ingest_positive: empty disclosure");
  const auto incoming = d.beacon_set();
  for (const StoredDisclosure& existing : store.positives) {
    if (existing.disclosure.beacon_set() == incoming) return false;
  }
  store.positives.push_back(StoredDisclosure{d, received_at_s});
  return true;
}

PublishedList reconcile_centralized(const AuthorityStore& store, const PositiveDisclosure& d,
                                    std::uint32_t epsilon_slots,
                                    const std::set<Beacon>& fraud_flagged,
                                    std::uint64_t published_at_s) {
  PublishedList out;
  out.published_at_s = published_at_s;
  for (const auto& [slot, beacon] : d.entries) out.beacons.insert(beacon);

  for (const auto& [tau, positive] : d.entries) {
    if (fraud_flagged.count(positive) > 0) continue;  // flagged beacons seed nothing
    auto hit = store.by_beacon.find(positive);
    if (hit == store.by_beacon.end()) continue;
    for (std::uint32_t idx : hit->second) {
      const BeaconRecord& sighting = store.records[idx];
      if (sighting.slot != tau) continue;
      const SlotIndex lo = tau >= epsilon_slots ? tau - epsilon_slots : 0;
      const SlotIndex hi = tau + epsilon_slots;
      for (SlotIndex s = lo; s <= hi; ++s) {
        auto bucket = store.by_totem_slot.find({sighting.totem_id, s});
        if (bucket == store.by_totem_slot.end()) continue;
        for (std::uint32_t widx : bucket->second) {
          const Beacon& b = store.records[widx].beacon;
          if (fraud_flagged.count(b) > 0) continue;  // nor appear as negatives
          out.beacons.insert(b);
        }
      }
    }
  }
  return out;
}

PublishedList reconcile_decentralized(const PositiveDisclosure& d,
                                      const std::vector<const TotemState*>& totems,
                                      std::uint32_t epsilon_slots,
                                      std::uint64_t published_at_s) {
  PublishedList out;
  out.published_at_s = published_at_s;
  for (const auto& [slot, beacon] : d.entries) out.beacons.insert(beacon);
  for (const TotemState* totem : totems) {
    for (const BeaconRecord& r : query_window(*totem, d.entries, epsilon_slots)) {
      out.beacons.insert(r.beacon);
    }
  }
  return out;
}

std::set<Beacon> detect_fraud(const AuthorityStore& store, double v_max_mps,
                              const std::map<std::string, std::pair<double, double>>& totem_positions,
                              std::uint32_t slot_len_s) {
  std::set<Beacon> flagged;
  for (const auto& [beacon, indices] : store.by_beacon) {
    if (indices.size() < 2) continue;
    for (std::size_t i = 0; i < indices.size() && flagged.count(beacon) == 0; ++i) {
      const BeaconRecord& a = store.records[indices[i]];
      auto pa = totem_positions.find(a.totem_id);
      if (pa == totem_positions.end()) {
        throw std::invalid_argument("detect_fraud: no position for totem " + a.totem_id);
      }
      for (std::size_t j = i + 1; j < indices.size(); ++j) {
        const BeaconRecord& b = store.records[indices[j]];
        if (a.totem_id == b.totem_id) continue;
        auto pb = totem_positions.find(b.totem_id);
        if (pb == totem_positions.end()) {
          throw std::invalid_argument("detect_fraud: no position for totem " + b.totem_id);
        }
        const double dx = pa->second.first - pb->second.first;
        const double dy = pa->second.second - pb->second.second;
        const double dist = std::hypot(dx, dy);
        const std::uint64_t dslot = a.slot > b.slot ? a.slot - b.slot : b.slot - a.slot;
        const double reach =
            v_max_mps * static_cast<double>(std::max<std::uint64_t>(1, dslot)) * slot_len_s;
        if (dist > reach) {
          flagged.insert(beacon);
          break;
        }
      }
    }
  }
  return flagged;
}

std::string publish(const PublishedList& list, std::uint64_t seed) {
  std::vector<std::string> hex;
  hex.reserve(list.beacons.size());
  for (const Beacon& b : list.beacons) hex.push_back(b.hex());
  Rng rng(seed);
  rng.shuffle(hex);

  std::string out = "{\"published_at\":" + std::to_string(list.published_at_s) + ",\"beacons\":[";
  for (std::size_t i = 0; i < hex.size(); ++i) {
    if (i > 0) out += ',';
    out += '"';
    out += hex[i];
    out += '"';
  }
  out += "]}\n";
  return out;
}

}  // namespace iotrace
