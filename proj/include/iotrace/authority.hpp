#pragma once

// Central authority: ingests totem records and hospital disclosures, runs
// reconciliation in both architectures, detects replayed beacons and publishes
// the flat positive+negative list.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "iotrace/protocol.hpp"
#include "iotrace/totem.hpp"

namespace iotrace {

struct StoredDisclosure {
  PositiveDisclosure disclosure;
  std::uint64_t received_at_s = 0;
};

// Append-only within a run. The vector is the source of truth; the two
// indexes are lookup accelerators and must always agree with a linear scan.
struct AuthorityStore {
  std::vector<BeaconRecord> records;
  std::unordered_map<Beacon, std::vector<std::uint32_t>, BeaconHash> by_beacon;
  std::map<std::pair<std::string, SlotIndex>, std::vector<std::uint32_t>> by_totem_slot;
  std::vector<StoredDisclosure> positives;
};

// Appends and indexes a batch; duplicate (totem, slot, beacon) triples
// coalesce to the first occurrence.
void ingest_records(AuthorityStore& store, const std::vector<BeaconRecord>& batch);

// Returns false when an identical disclosure (beacon-set equality) is already
// stored. Throws std::invalid_argument on an empty disclosure.
bool ingest_positive(AuthorityStore& store, const PositiveDisclosure& d,
                     std::uint64_t received_at_s);

// For each positive (tau, b) sighted at a totem t, all beacons stored at t
// with slot in [tau +- epsilon]; the published set is the union of those
// windows plus every disclosed beacon. Beacons in `fraud_flagged` neither
// seed windows nor appear as negatives.
PublishedList reconcile_centralized(const AuthorityStore& store, const PositiveDisclosure& d,
                                    std::uint32_t epsilon_slots,
                                    const std::set<Beacon>& fraud_flagged,
                                    std::uint64_t published_at_s);

// Same outcome, computed by pushing the positives to every reachable totem
// and unioning their window queries.
PublishedList reconcile_decentralized(const PositiveDisclosure& d,
                                      const std::vector<const TotemState*>& totems,
                                      std::uint32_t epsilon_slots,
                                      std::uint64_t published_at_s);

// A beacon is flagged iff it was recorded at two different totems whose
// distance exceeds v_max * max(1, |slot delta|) * slot_len. Throws
// std::invalid_argument naming any totem that has no position.
std::set<Beacon> detect_fraud(const AuthorityStore& store, double v_max_mps,
                              const std::map<std::string, std::pair<double, double>>& totem_positions,
                              std::uint32_t slot_len_s);

// Serialized publication file: {"published_at": s, "beacons": [...]} with the
// hex-encoded set in seeded-shuffle order. Byte-stable for a given seed.
std::string publish(const PublishedList& list, std::uint64_t seed);

}  // namespace iotrace
