#pragma once

// Privacy-enhanced wire: devices encapsulate a fresh 128-bit session key to a
// totem's public key and send beacons under AEAD, so the air interface carries
// only ciphertext.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iotrace/core.hpp"
#include "iotrace/crypto.hpp"
#include "iotrace/rng.hpp"

namespace iotrace {

struct TotemKeyPair {
  crypto::Key32 public_key{};
  crypto::Key32 private_key{};
};

TotemKeyPair generate_totem_keypair(Rng& rng);

// Static per-run map totem_id -> public key, preloaded on every device.
struct TotemDirectory {
  std::map<std::string, crypto::Key32> entries;
};

// Nonces are a strictly increasing counter; one session never outlives this
// many encryptions.
inline constexpr std::uint64_t kSessionNonceLimit = 1ull << 20;

struct Session {
  std::string totem_id;
  crypto::Key16 key{};
  SlotIndex established_slot = 0;
  std::uint64_t nonce_counter = 0;
  crypto::Key32 encap{};       // ephemeral public key; travels over the air once
  std::uint64_t session_id = 0;
};

std::uint64_t session_id_of(const crypto::Key32& encap);

// Fresh key encapsulated against the totem's directory entry. Throws
// std::invalid_argument on unknown totem_id.
Session establish_session(const TotemDirectory& directory, const std::string& totem_id,
                          SlotIndex slot, Rng& rng);

// Totem side: recover the session key from the over-the-air encapsulation.
crypto::Key16 decapsulate(const TotemKeyPair& keys, const crypto::Key32& encap);

// Wire format: length byte, then nonce(12) || ciphertext(16) || tag(16).
std::vector<std::uint8_t> encrypt_beacon(Session& s, const Beacon& b);
std::optional<Beacon> decrypt_beacon(const crypto::Key16& session_key,
                                     std::span<const std::uint8_t> wire);

}  // namespace iotrace
