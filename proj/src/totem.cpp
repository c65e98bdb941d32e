#include "iotrace/totem.hpp"

#include <cstring>
#include <stdexcept>

namespace iotrace {

namespace {

constexpr std::uint8_t kFrameEstablish = 0x01;
constexpr std::uint8_t kFrameData = 0x02;
constexpr char kAtRestMagic[6] = {'I', 'O', 'T', 'A', 'R', '1'};
constexpr std::string_view kAtRestInfo = "iotrace at-rest v1";

std::uint64_t read_u64_be(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

// Privacy-enhanced frame -> beacon, updating the session table. nullopt means
// the payload is stale, foreign or tampered and must be dropped.
std::optional<Beacon> open_frame(TotemState& state, const std::vector<std::uint8_t>& payload) {
  if (payload.empty()) return std::nullopt;
  if (payload[0] == kFrameEstablish) {
    if (payload.size() < 1 + 8 + 32 + 29) return std::nullopt;
    if (!state.keypair) return std::nullopt;
    const std::uint64_t sid = read_u64_be(payload.data() + 1);
    crypto::Key32 encap{};
    std::memcpy(encap.data(), payload.data() + 9, 32);
    if (session_id_of(encap) != sid) return std::nullopt;
    const crypto::Key16 key = decapsulate(*state.keypair, encap);
    auto beacon = decrypt_beacon(key, std::span(payload).subspan(41));
    if (!beacon) return std::nullopt;
    state.sessions[sid] = key;
    return beacon;
  }
  if (payload[0] == kFrameData) {
    if (payload.size() < 1 + 8 + 29) return std::nullopt;
    const std::uint64_t sid = read_u64_be(payload.data() + 1);
    auto it = state.sessions.find(sid);
    if (it == state.sessions.end()) return std::nullopt;
    return decrypt_beacon(it->second, std::span(payload).subspan(9));
  }
  return std::nullopt;
}

std::vector<std::uint8_t> serialize_store(const TotemState& state) {
  const auto& store = state.mode == ProtocolMode::centralized ? state.pending : state.local_store;
  std::string out;
  for (const auto& [slot, beacon] : store) {
    out += "{\"totem\":\"" + state.totem_id + "\",\"slot\":" + std::to_string(slot) +
           ",\"beacon\":\"" + beacon.hex() + "\"}\n";
  }
  return {out.begin(), out.end()};
}

}  // namespace

void receive_beacon(TotemState& state, const Transmission& tx, std::uint64_t now_ms) {
  const SlotIndex slot = slot_of_ms(now_ms, state.slot_len_s);
  Beacon beacon;
  if (wire_encrypted(state.mode)) {
    auto opened = open_frame(state, tx.payload);
    if (!opened) {
      ++state.drop_count;
      return;
    }
    beacon = *opened;
  } else {
    if (tx.payload.size() != beacon.bytes.size()) {
      ++state.drop_count;
      return;
    }
    std::memcpy(beacon.bytes.data(), tx.payload.data(), beacon.bytes.size());
  }
  auto& store = state.mode == ProtocolMode::centralized ? state.pending : state.local_store;
  store.emplace(slot, beacon);
}

std::vector<BeaconRecord> flush_centralized(TotemState& state) {
  if (state.mode != ProtocolMode::centralized) {
    throw std::invalid_argument("flush_centralized: totem not in centralized mode");
  }
  std::vector<BeaconRecord> out;
  out.reserve(state.pending.size());
  for (const auto& [slot, beacon] : state.pending) {
    out.push_back(BeaconRecord{state.totem_id, slot, beacon});
  }
  state.pending.clear();
  return out;
}

std::vector<BeaconRecord> query_window(const TotemState& state,
                                       const std::vector<std::pair<SlotIndex, Beacon>>& positives,
                                       std::uint32_t epsilon_slots) {
  if (state.mode == ProtocolMode::centralized) {
    throw std::invalid_argument("query_window: totem runs in centralized mode");
  }
  std::set<std::pair<SlotIndex, Beacon>> hits;
  for (const auto& [tau, positive] : positives) {
    if (state.local_store.count({tau, positive}) == 0) continue;
    const SlotIndex lo = tau >= epsilon_slots ? tau - epsilon_slots : 0;
    const SlotIndex hi = tau + epsilon_slots;
    for (auto it = state.local_store.lower_bound({lo, Beacon{}});
         it != state.local_store.end() && it->first <= hi; ++it) {
      if (it->second == positive) continue;
      hits.insert(*it);
    }
  }
  std::vector<BeaconRecord> out;
  out.reserve(hits.size());
  for (const auto& [slot, beacon] : hits) {
    out.push_back(BeaconRecord{state.totem_id, slot, beacon});
  }
  return out;
}

std::vector<std::uint8_t> at_rest_image(const TotemState& state,
                                        const crypto::Key32* authority_public) {
  const std::vector<std::uint8_t> plain = serialize_store(state);
  if (!state.encrypt_at_rest) return plain;
  if (authority_public == nullptr) {
    throw std::invalid_argument("at_rest_image: encrypt_at_rest needs the authority key");
  }
  // Deterministic seal: the ephemeral secret is a hash of content and
  // recipient, so identical stores produce identical images and runs stay
  // reproducible. The content is high-entropy beacon material.
  std::vector<std::uint8_t> seed(plain);
  seed.insert(seed.end(), authority_public->begin(), authority_public->end());
  crypto::Key32 eph_private = crypto::sha256(seed);
  const crypto::Key32 eph_public = crypto::x25519_public(eph_private);
  const crypto::Key32 shared = crypto::x25519_shared(eph_private, *authority_public);
  std::vector<std::uint8_t> salt(eph_public.begin(), eph_public.end());
  salt.insert(salt.end(), authority_public->begin(), authority_public->end());
  const crypto::Key16 key = crypto::hkdf16(shared, salt, kAtRestInfo);
  const std::array<std::uint8_t, 12> nonce{};  // key is unique per content
  const crypto::Bytes ct = crypto::aes128gcm_encrypt(key, nonce, plain);

  std::vector<std::uint8_t> image;
  image.reserve(sizeof(kAtRestMagic) + eph_public.size() + ct.size());
  image.insert(image.end(), kAtRestMagic, kAtRestMagic + sizeof(kAtRestMagic));
  image.insert(image.end(), eph_public.begin(), eph_public.end());
  image.insert(image.end(), ct.begin(), ct.end());
  return image;
}

std::optional<std::vector<std::uint8_t>> open_at_rest_image(
    const crypto::Key32& authority_private, std::span<const std::uint8_t> image) {
  if (image.size() < sizeof(kAtRestMagic) + 32 + 16) return std::nullopt;
  if (std::memcmp(image.data(), kAtRestMagic, sizeof(kAtRestMagic)) != 0) return std::nullopt;
  crypto::Key32 eph_public{};
  std::memcpy(eph_public.data(), image.data() + sizeof(kAtRestMagic), 32);
  const crypto::Key32 authority_public = crypto::x25519_public(authority_private);
  const crypto::Key32 shared = crypto::x25519_shared(authority_private, eph_public);
  std::vector<std::uint8_t> salt(eph_public.begin(), eph_public.end());
  salt.insert(salt.end(), authority_public.begin(), authority_public.end());
  const crypto::Key16 key = crypto::hkdf16(shared, salt, kAtRestInfo);
  const std::array<std::uint8_t, 12> nonce{};
  return crypto::aes128gcm_decrypt(key, nonce, image.subspan(sizeof(kAtRestMagic) + 32));
}

}  // namespace iotrace
