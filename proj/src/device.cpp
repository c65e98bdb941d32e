#include "iotrace/device.hpp"

#include <stdexcept>

namespace iotrace {

namespace {

void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

constexpr std::uint8_t kFrameEstablish = 0x01;
constexpr std::uint8_t kFrameData = 0x02;

}  // namespace

Transmission broadcast_tick(DeviceState& state, std::uint64_t now_ms, ProtocolMode mode) {
  if (wire_encrypted(mode)) {
    throw std::invalid_argument(
        "broadcast_tick: privacy-enhanced wire needs a totem session, use "
        "broadcast_tick_encrypted");
  }
  const SlotIndex slot = slot_of_ms(now_ms, state.slot_len_s);
  const Beacon b = derive_beacon(state.key, slot);
  Transmission tx;
  tx.payload.assign(b.bytes.begin(), b.bytes.end());
  return tx;
}

Transmission broadcast_tick_encrypted(DeviceState& state, std::uint64_t now_ms,
                                      const std::string& totem_id, Rng& rng) {
  if (state.directory == nullptr) {
    throw std::invalid_argument("broadcast_tick_encrypted: device has no totem directory");
  }
  const SlotIndex slot = slot_of_ms(now_ms, state.slot_len_s);
  const Beacon b = derive_beacon(state.key, slot);

  auto it = state.sessions.find(totem_id);
  const bool fresh = it == state.sessions.end() || it->second.established_slot != slot;
  if (fresh) {
    Session s = establish_session(*state.directory, totem_id, slot, rng);
    it = state.sessions.insert_or_assign(totem_id, std::move(s)).first;
  }
  Session& session = it->second;

  Transmission tx;
  tx.addressed_totem = totem_id;
  tx.payload.push_back(fresh ? kFrameEstablish : kFrameData);
  put_u64_be(tx.payload, session.session_id);
  if (fresh) {
    tx.payload.insert(tx.payload.end(), session.encap.begin(), session.encap.end());
  }
  const auto wire = encrypt_beacon(session, b);
  tx.payload.insert(tx.payload.end(), wire.begin(), wire.end());
  return tx;
}

PositiveDisclosure disclose_positive(const DeviceState& state, std::uint64_t diagnosis_time_s) {
  const std::uint64_t lookback_s = static_cast<std::uint64_t>(state.lookback_days) * 86400ull;
  const std::uint64_t from_s = diagnosis_time_s > lookback_s ? diagnosis_time_s - lookback_s : 0;
  const SlotIndex from = slot_of(from_s, state.slot_len_s);
  const SlotIndex to = slot_of(diagnosis_time_s, state.slot_len_s);
  PositiveDisclosure d;
  d.entries = derive_beacon_window(state.key, from, to);
  return d;
}

ExposureReport match_published(const DeviceState& state, const PublishedList& list,
                               std::uint64_t now_s) {
  ExposureReport report;
  if (!list.beacons.empty()) {
    const std::uint64_t lookback_s = static_cast<std::uint64_t>(state.lookback_days) * 86400ull;
    const std::uint64_t from_s = now_s > lookback_s ? now_s - lookback_s : 0;
    const SlotIndex from = slot_of(from_s, state.slot_len_s);
    const SlotIndex to = slot_of(now_s, state.slot_len_s);
    for (SlotIndex s = from;; ++s) {
      if (list.beacons.count(derive_beacon(state.key, s)) > 0) {
        report.matched_slots.insert(s);
      }
      if (s == to) break;
    }
  }
  report.exposure_seconds = report.matched_slots.size() * state.slot_len_s;
  report.notified = report.exposure_seconds >= state.risk_threshold_s;
  return report;
}

}  // namespace iotrace
