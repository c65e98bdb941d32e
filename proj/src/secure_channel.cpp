#include "iotrace/secure_channel.hpp"

#include <cstring>
#include <stdexcept>

namespace iotrace {

namespace {

constexpr std::string_view kSessionInfo = "iotrace session v1";

crypto::Key16 derive_session_key(const crypto::Key32& shared, const crypto::Key32& encap,
                                 const crypto::Key32& totem_public) {
  std::vector<std::uint8_t> salt;
  salt.reserve(64);
  salt.insert(salt.end(), encap.begin(), encap.end());
  salt.insert(salt.end(), totem_public.begin(), totem_public.end());
  return crypto::hkdf16(shared, salt, kSessionInfo);
}

std::array<std::uint8_t, 12> nonce_for(std::uint64_t counter) {
  std::array<std::uint8_t, 12> nonce{};
  for (int i = 0; i < 8; ++i) {
    nonce[11 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
  }
  return nonce;
}

}  // namespace

TotemKeyPair generate_totem_keypair(Rng& rng) {
  TotemKeyPair kp;
  rng.fill(kp.private_key.data(), kp.private_key.size());
  kp.public_key = crypto::x25519_public(kp.private_key);
  return kp;
}

std::uint64_t session_id_of(const crypto::Key32& encap) {
  auto digest = crypto::sha256(encap);
  std::uint64_t id = 0;
  for (int i = 0; i < 8; ++i) id = (id << 8) | digest[static_cast<std::size_t>(i)];
  return id;
}

Session establish_session(const TotemDirectory& directory, const std::string& totem_id,
                          SlotIndex slot, Rng& rng) {
  auto it = directory.entries.find(totem_id);
  if (it == directory.entries.end()) {
    throw std::invalid_argument("establish_session: unknown totem id " + totem_id);
  }
  Session s;
  s.totem_id = totem_id;
  s.established_slot = slot;
  crypto::Key32 eph_private{};
  rng.fill(eph_private.data(), eph_private.size());
  s.encap = crypto::x25519_public(eph_private);
  const crypto::Key32 shared = crypto::x25519_shared(eph_private, it->second);
  s.key = derive_session_key(shared, s.encap, it->second);
  s.session_id = session_id_of(s.encap);
  return s;
}

crypto::Key16 decapsulate(const TotemKeyPair& keys, const crypto::Key32& encap) {
  const crypto::Key32 shared = crypto::x25519_shared(keys.private_key, encap);
  return derive_session_key(shared, encap, keys.public_key);
}

std::vector<std::uint8_t> encrypt_beacon(Session& s, const Beacon& b) {
  if (s.nonce_counter >= kSessionNonceLimit) {
    throw std::runtime_error("encrypt_beacon: nonce exhausted, re-establish the session");
  }
  const auto nonce = nonce_for(s.nonce_counter++);
  const crypto::Bytes ct = crypto::aes128gcm_encrypt(s.key, nonce, b.bytes);
  std::vector<std::uint8_t> wire;
  wire.reserve(1 + nonce.size() + ct.size());
  wire.push_back(static_cast<std::uint8_t>(nonce.size() + ct.size()));
  wire.insert(wire.end(), nonce.begin(), nonce.end());
  wire.insert(wire.end(), ct.begin(), ct.end());
  return wire;
}

std::optional<Beacon> decrypt_beacon(const crypto::Key16& session_key,
                                     std::span<const std::uint8_t> wire) {
  if (wire.size() < 1 + 12 + 16) return std::nullopt;
  if (wire[0] != wire.size() - 1) return std::nullopt;
  std::array<std::uint8_t, 12> nonce{};
  std::memcpy(nonce.data(), wire.data() + 1, 12);
  auto pt = crypto::aes128gcm_decrypt(session_key, nonce, wire.subspan(13));
  if (!pt || pt->size() != 16) return std::nullopt;
  Beacon b;
  std::copy(pt->begin(), pt->end(), b.bytes.begin());
  return b;
}

}  // namespace iotrace
