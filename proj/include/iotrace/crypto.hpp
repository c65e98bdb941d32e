#pragma once

// Thin wrappers over OpenSSL for the primitives the protocol layers on:
// X25519 key agreement, HKDF-SHA256, AES-128-GCM and SHA-256.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iotrace::crypto {

using Bytes = std::vector<std::uint8_t>;
using Key16 = std::array<std::uint8_t, 16>;
using Key32 = std::array<std::uint8_t, 32>;

Key32 x25519_public(const Key32& private_key);
Key32 x25519_shared(const Key32& private_key, const Key32& peer_public);

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

Key16 hkdf16(std::span<const std::uint8_t> ikm, std::span<const std::uint8_t> salt,
             std::string_view info);

// Returns ciphertext || 16-byte tag.
Bytes aes128gcm_encrypt(const Key16& key, const std::array<std::uint8_t, 12>& nonce,
                        std::span<const std::uint8_t> plaintext);

// Input is ciphertext || tag; nullopt on authentication failure.
std::optional<Bytes> aes128gcm_decrypt(const Key16& key,
                                       const std::array<std::uint8_t, 12>& nonce,
                                       std::span<const std::uint8_t> ct_and_tag);

}  // namespace iotrace::crypto
