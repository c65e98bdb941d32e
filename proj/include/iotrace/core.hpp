#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iotrace {

// Count of slots since epoch 0 of the simulation.
using SlotIndex = std::uint64_t;

// 16-byte opaque ephemeral ID. Equality is byte equality; the wire/file
// encoding is 32 lowercase hex chars.
struct Beacon {
  std::array<std::uint8_t, 16> bytes{};

  auto operator<=>(const Beacon&) const = default;

  std::string hex() const;
  static std::optional<Beacon> from_hex(std::string_view s);
};

struct BeaconHash {
  std::size_t operator()(const Beacon& b) const noexcept {
    // Beacons are cipher output; the first 8 bytes are already uniform.
    std::size_t h;
    static_assert(sizeof(h) <= 16);
    __builtin_memcpy(&h, b.bytes.data(), sizeof(h));
    return h;
  }
};

// Per-device 128-bit PRF key. `owner` is simulation-internal bookkeeping and
// never appears in any wire message or published artifact.
struct DeviceKey {
  std::array<std::uint8_t, 16> key{};
  std::uint32_t owner = 0;
};

// floor(timestamp / slot_len). Throws std::invalid_argument on slot_len == 0.
SlotIndex slot_of(std::uint64_t timestamp_s, std::uint32_t slot_len_s);
SlotIndex slot_of_ms(std::uint64_t timestamp_ms, std::uint32_t slot_len_s);

// Raw single-block AES-128 entry point. Beacon derivation is this cipher
// applied to the canonical slot block; tests pin it with the FIPS-197 vector.
std::array<std::uint8_t, 16> aes128_encrypt_block(
    const std::array<std::uint8_t, 16>& key,
    const std::array<std::uint8_t, 16>& block);

// Canonical PRF input for a slot: 8 zero bytes followed by the big-endian
// 64-bit slot index.
std::array<std::uint8_t, 16> slot_block(SlotIndex slot);

Beacon derive_beacon(const DeviceKey& key, SlotIndex slot);

// One (slot, beacon) entry per slot in [from, to]. Throws on from > to.
std::vector<std::pair<SlotIndex, Beacon>> derive_beacon_window(
    const DeviceKey& key, SlotIndex from, SlotIndex to);

}  // namespace iotrace
