#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iotrace/device.hpp"
#include "iotrace/rng.hpp"

using namespace iotrace;

namespace {

DeviceState make_device(std::uint64_t seed, std::uint32_t slot_len = 600) {
  DeviceState d;
  Rng rng(seed);
  rng.fill(d.key.key.data(), d.key.key.size());
  d.slot_len_s = slot_len;
  return d;
}

}  // namespace

TEST_CASE("broadcast_tick carries the current slot's beacon in cleartext") {
  DeviceState d = make_device(10);
  const Transmission tx = broadcast_tick(d, 0, ProtocolMode::centralized);
  const Beacon expected = derive_beacon(d.key, 0);
  CHECK(tx.payload == std::vector<std::uint8_t>(expected.bytes.begin(), expected.bytes.end()));
  CHECK_FALSE(tx.addressed_totem.has_value());

  // two ticks inside one slot are byte-identical
  const Transmission a = broadcast_tick(d, 0, ProtocolMode::decentralized);
  const Transmission b = broadcast_tick(d, 500, ProtocolMode::decentralized);
  CHECK(a.payload == b.payload);

  // slot boundary changes the payload
  const Transmission before = broadcast_tick(d, 599'000, ProtocolMode::centralized);
  const Transmission after = broadcast_tick(d, 601'000, ProtocolMode::centralized);
  CHECK(before.payload != after.payload);

  CHECK_THROWS_AS(broadcast_tick(d, 0, ProtocolMode::privacy_enhanced), std::invalid_argument);
}

TEST_CASE("disclose_positive covers the lookback window") {
  DeviceState d = make_device(11);

  // diagnosis right at time zero: a single-slot disclosure
  const PositiveDisclosure at_zero = disclose_positive(d, 0);
  REQUIRE(at_zero.entries.size() == 1);
  CHECK(at_zero.entries[0].first == 0);

  // 14 days of 600 s slots: 2016 or 2017 entries depending on alignment
  const std::uint64_t two_weeks = 14ull * 86400ull;
  CHECK(disclose_positive(d, two_weeks).entries.size() == 2017);      // slots 0..2016
  CHECK(disclose_positive(d, two_weeks - 1).entries.size() == 2016);  // clamped at 0

  // entries are exactly what broadcast_tick would have emitted
  const PositiveDisclosure recent = disclose_positive(d, 1800);
  for (const auto& [slot, beacon] : recent.entries) {
    CHECK(beacon == derive_beacon(d.key, slot));
  }
}

TEST_CASE("match_published intersects own regenerated beacons with the list") {
  DeviceState d = make_device(12);
  d.risk_threshold_s = 2 * d.slot_len_s;

  SUBCASE("empty list matches nothing") {
    const ExposureReport r = match_published(d, PublishedList{}, 7200);
    CHECK(r.matched_slots.empty());
    CHECK(r.exposure_seconds == 0);
    CHECK_FALSE(r.notified);
  }

  SUBCASE("list containing the last 3 slots notifies at threshold 2 slots") {
    const std::uint64_t now = 3 * 600;  // slots 0..3 exist
    PublishedList list;
    for (SlotIndex s = 1; s <= 3; ++s) list.beacons.insert(derive_beacon(d.key, s));
    const ExposureReport r = match_published(d, list, now);
    CHECK(r.matched_slots == std::set<SlotIndex>{1, 2, 3});
    CHECK(r.exposure_seconds == 3 * 600);
    CHECK(r.notified);
  }

  SUBCASE("other devices' beacons never match") {
    DeviceState other = make_device(13);
    PublishedList list;
    for (SlotIndex s = 0; s <= 10; ++s) list.beacons.insert(derive_beacon(other.key, s));
    const ExposureReport r = match_published(d, list, 6600);
    CHECK(r.matched_slots.empty());
    CHECK_FALSE(r.notified);
  }
}

TEST_CASE("raising the risk threshold never flips notified on") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    DeviceState d = make_device(1000 + trial, 60);
    const std::uint64_t now = 50 * 60;
    PublishedList list;
    for (SlotIndex s = 0; s <= 50; ++s) {
      if (rng.below(3) == 0) list.beacons.insert(derive_beacon(d.key, s));
    }
    bool prev_notified = true;
    for (std::uint32_t threshold : {60u, 120u, 300u, 600u, 1200u, 3600u}) {
      d.risk_threshold_s = threshold;
      const ExposureReport r = match_published(d, list, now);
      if (threshold == 60u) {
        prev_notified = r.notified;
        continue;
      }
      CHECK_FALSE((!prev_notified && r.notified));  // monotone in threshold
      prev_notified = r.notified;
    }
  }
}

TEST_CASE("device state growth is bounded by the directory, not by encounters") {
  Rng rng(16);
  TotemDirectory directory;
  TotemKeyPair kp1 = generate_totem_keypair(rng);
  TotemKeyPair kp2 = generate_totem_keypair(rng);
  directory.entries["T-0001"] = kp1.public_key;
  directory.entries["T-0002"] = kp2.public_key;

  DeviceState d = make_device(17, 60);
  d.directory = &directory;
  // 50 slots of broadcasting to both totems: thousands of "encounters"
  for (std::uint64_t t_ms = 0; t_ms < 50 * 60'000ull; t_ms += 15'000) {
    broadcast_tick_encrypted(d, t_ms, "T-0001", rng);
    broadcast_tick_encrypted(d, t_ms, "T-0002", rng);
  }
  CHECK(d.sessions.size() == 2);  // one live session per totem, re-keyed in place
}

TEST_CASE("exposure accounting matches the slot count invariant") {
  DeviceState d = make_device(15, 120);
  PublishedList list;
  list.beacons.insert(derive_beacon(d.key, 2));
  list.beacons.insert(derive_beacon(d.key, 5));
  const ExposureReport r = match_published(d, list, 1200);
  CHECK(r.exposure_seconds == r.matched_slots.size() * d.slot_len_s);
  CHECK(r.notified == (r.exposure_seconds >= d.risk_threshold_s));
}
