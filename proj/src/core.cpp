#include "iotrace/core.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

#include "iotrace/hex.hpp"

namespace iotrace {

std::string Beacon::hex() const { return to_hex(bytes); }

std::optional<Beacon> Beacon::from_hex(std::string_view s) {
  auto arr = from_hex_exact<16>(s);
  if (!arr) return std::nullopt;
  return Beacon{*arr};
}

SlotIndex slot_of(std::uint64_t timestamp_s, std::uint32_t slot_len_s) {
  if (slot_len_s == 0) throw std::invalid_argument("slot_of: slot_len must be > 0");
  return timestamp_s / slot_len_s;
}

SlotIndex slot_of_ms(std::uint64_t timestamp_ms, std::uint32_t slot_len_s) {
  if (slot_len_s == 0) throw std::invalid_argument("slot_of: slot_len must be > 0");
  return timestamp_ms / (static_cast<std::uint64_t>(slot_len_s) * 1000ull);
}

std::array<std::uint8_t, 16> aes128_encrypt_block(const std::array<std::uint8_t, 16>& key,
                                                  const std::array<std::uint8_t, 16>& block) {
  // One context per thread; re-keying is much cheaper than re-allocating and
  // the hot paths (window derivation, collision sweeps) hit this per block.
  thread_local std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx{
      EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free};
  if (!ctx) throw std::runtime_error("aes128: EVP_CIPHER_CTX_new failed");

  std::array<std::uint8_t, 16> out{};
  int len = 0;
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr) != 1 ||
      EVP_CIPHER_CTX_set_padding(ctx.get(), 0) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.data(), &len, block.data(), 16) != 1 || len != 16) {
    throw std::runtime_error("aes128: block encryption failed");
  }
  return out;
}

std::array<std::uint8_t, 16> slot_block(SlotIndex slot) {
  std::array<std::uint8_t, 16> block{};
  for (int i = 0; i < 8; ++i) {
    block[15 - i] = static_cast<std::uint8_t>(slot >> (8 * i));
  }
  return block;
}

Beacon derive_beacon(const DeviceKey& key, SlotIndex slot) {
  return Beacon{aes128_encrypt_block(key.key, slot_block(slot))};
}

std::vector<std::pair<SlotIndex, Beacon>> derive_beacon_window(const DeviceKey& key,
                                                               SlotIndex from, SlotIndex to) {
  if (from > to) throw std::invalid_argument("derive_beacon_window: from > to");
  std::vector<std::pair<SlotIndex, Beacon>> out;
  out.reserve(static_cast<std::size_t>(to - from + 1));
  for (SlotIndex s = from;; ++s) {
    out.emplace_back(s, derive_beacon(key, s));
    if (s == to) break;
  }
  return out;
}

}  // namespace iotrace
