#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "iotrace/device.hpp"
#include "iotrace/hex.hpp"
#include "iotrace/rng.hpp"
#include "iotrace/totem.hpp"

using namespace iotrace;

namespace {

Transmission cleartext_of(const Beacon& b) {
  Transmission tx;
  tx.payload.assign(b.bytes.begin(), b.bytes.end());
  return tx;
}

Beacon beacon_n(std::uint8_t n) {
  Beacon b;
  b.bytes.fill(n);
  return b;
}

}  // namespace

TEST_CASE("duplicate broadcasts within one slot coalesce to one record") {
  TotemState t;
  t.totem_id = "T-0001";
  t.mode = ProtocolMode::centralized;
  t.slot_len_s = 600;
  const Beacon b = beacon_n(1);
  receive_beacon(t, cleartext_of(b), 1000);
  receive_beacon(t, cleartext_of(b), 1500);
  CHECK(t.pending.size() == 1);

  // same beacon in a later slot is a second record
  receive_beacon(t, cleartext_of(b), 600'000);
  CHECK(t.pending.size() == 2);
}

TEST_CASE("records land in distinct slots") {
  TotemState t;
  t.totem_id = "T-0001";
  t.mode = ProtocolMode::decentralized;
  t.slot_len_s = 600;
  receive_beacon(t, cleartext_of(beacon_n(7)), 7 * 600'000);
  receive_beacon(t, cleartext_of(beacon_n(8)), 8 * 600'000);
  REQUIRE(t.local_store.size() == 2);
  auto it = t.local_store.begin();
  CHECK(it->first == 7);
  CHECK((++it)->first == 8);
}

TEST_CASE("flush_centralized drains pending in (slot, beacon) order") {
  TotemState t;
  t.totem_id = "T-0002";
  t.mode = ProtocolMode::centralized;
  t.slot_len_s = 600;

  CHECK(flush_centralized(t).empty());

  receive_beacon(t, cleartext_of(beacon_n(9)), 600'000);
  receive_beacon(t, cleartext_of(beacon_n(3)), 0);
  receive_beacon(t, cleartext_of(beacon_n(5)), 1000);
  const auto batch = flush_centralized(t);
  REQUIRE(batch.size() == 3);
  CHECK(batch[0].slot == 0);
  CHECK(batch[0].beacon == beacon_n(3));
  CHECK(batch[1].beacon == beacon_n(5));
  CHECK(batch[2].slot == 1);
  CHECK(t.pending.empty());

  // second consecutive flush is an empty drain
  CHECK(flush_centralized(t).empty());

  TotemState wrong;
  wrong.mode = ProtocolMode::decentralized;
  CHECK_THROWS_AS(flush_centralized(wrong), std::invalid_argument);
}

TEST_CASE("query_window filters the local store around sighted positives") {
  TotemState t;
  t.totem_id = "T-0003";
  t.mode = ProtocolMode::decentralized;
  t.slot_len_s = 600;
  const Beacon a = beacon_n(0xa);
  const Beacon b = beacon_n(0xb);
  const Beacon c = beacon_n(0xc);
  t.local_store = {{5, a}, {5, b}, {6, c}};

  SUBCASE("positives absent from the store contribute nothing") {
    CHECK(query_window(t, {{9, beacon_n(0xd)}}, 2).empty());
    CHECK(query_window(t, {{4, a}}, 0).empty());  // right beacon, wrong slot
  }

  SUBCASE("epsilon 0 returns the co-slot negatives only") {
    const auto hits = query_window(t, {{5, a}}, 0);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].slot == 5);
    CHECK(hits[0].beacon == b);
  }

  SUBCASE("epsilon 1 widens to the adjacent slot") {
    const auto hits = query_window(t, {{5, a}}, 1);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].beacon == b);
    CHECK(hits[1].beacon == c);
  }

  SUBCASE("centralized totems reject window queries") {
    TotemState wrong;
    wrong.mode = ProtocolMode::centralized;
    CHECK_THROWS_AS(query_window(wrong, {{5, a}}, 1), std::invalid_argument);
  }
}

TEST_CASE("privacy-enhanced ingestion decrypts, coalesces and drops garbage") {
  Rng rng(21);
  TotemState t;
  t.totem_id = "T-0004";
  t.mode = ProtocolMode::privacy_enhanced;
  t.slot_len_s = 600;
  t.keypair = generate_totem_keypair(rng);

  TotemDirectory directory;
  directory.entries[t.totem_id] = t.keypair->public_key;

  DeviceState dev;
  rng.fill(dev.key.key.data(), dev.key.key.size());
  dev.slot_len_s = 600;
  dev.directory = &directory;

  const Transmission first = broadcast_tick_encrypted(dev, 0, t.totem_id, rng);
  const Transmission second = broadcast_tick_encrypted(dev, 500, t.totem_id, rng);
  CHECK(first.payload != second.payload);  // fresh nonce every emission

  receive_beacon(t, first, 0);
  receive_beacon(t, second, 500);
  REQUIRE(t.local_store.size() == 1);  // same slot, same beacon underneath
  CHECK(t.local_store.begin()->second == derive_beacon(dev.key, 0));
  CHECK(t.drop_count == 0);

  SUBCASE("garbage ciphertext leaves the store unchanged and counts a drop") {
    Transmission garbage = second;
    garbage.payload[garbage.payload.size() / 2] ^= 0x5a;
    receive_beacon(t, garbage, 700);
    CHECK(t.local_store.size() == 1);
    CHECK(t.drop_count == 1);
  }

  SUBCASE("ciphertext for a foreign totem is dropped") {
    Rng rng2(22);
    TotemState other;
    other.totem_id = "T-0005";
    other.mode = ProtocolMode::privacy_enhanced;
    other.slot_len_s = 600;
    other.keypair = generate_totem_keypair(rng2);
    receive_beacon(other, first, 0);
    CHECK(other.local_store.empty());
    CHECK(other.drop_count == 1);
  }

  SUBCASE("data frame without a prior establishment is dropped") {
    TotemState fresh;
    fresh.totem_id = t.totem_id;
    fresh.mode = ProtocolMode::privacy_enhanced;
    fresh.slot_len_s = 600;
    fresh.keypair = t.keypair;
    receive_beacon(fresh, second, 500);  // data frame, session unknown
    CHECK(fresh.local_store.empty());
    CHECK(fresh.drop_count == 1);
  }
}

TEST_CASE("at-rest image hides beacons when encrypt_at_rest is set") {
  Rng rng(23);
  const TotemKeyPair authority = generate_totem_keypair(rng);

  TotemState t;
  t.totem_id = "T-0006";
  t.mode = ProtocolMode::decentralized;
  t.slot_len_s = 600;
  const Beacon b = beacon_n(0x42);
  t.local_store = {{3, b}};

  SUBCASE("plaintext image exposes the record when the flag is off") {
    const auto image = at_rest_image(t, nullptr);
    const std::string text(image.begin(), image.end());
    CHECK(text.find(b.hex()) != std::string::npos);
  }

  SUBCASE("sealed image carries no plaintext beacon bytes") {
    t.encrypt_at_rest = true;
    const auto image = at_rest_image(t, &authority.public_key);
    const std::string image_hex = to_hex(image);
    CHECK(image_hex.find(b.hex()) == std::string::npos);

    // the authority can still open it
    const auto opened = open_at_rest_image(authority.private_key, image);
    REQUIRE(opened);
    const std::string text(opened->begin(), opened->end());
    CHECK(text.find(b.hex()) != std::string::npos);

    // identical stores seal identically (reproducible runs)
    CHECK(at_rest_image(t, &authority.public_key) == image);
  }
}
