#include "iotrace/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>
#include <openssl/sha.h>

#include <memory>
#include <stdexcept>

namespace iotrace::crypto {

namespace {

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

PkeyPtr raw_private(const Key32& key) {
  return PkeyPtr{EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr, key.data(), key.size()),
                 EVP_PKEY_free};
}

PkeyPtr raw_public(const Key32& key) {
  return PkeyPtr{EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, key.data(), key.size()),
                 EVP_PKEY_free};
}

[[noreturn]] void fail(const char* what) { throw std::runtime_error(std::string("crypto: ") + what); }

}  // namespace

Key32 x25519_public(const Key32& private_key) {
  auto pkey = raw_private(private_key);
  if (!pkey) fail("x25519 private key load failed");
  Key32 out{};
  std::size_t len = out.size();
  if (EVP_PKEY_get_raw_public_key(pkey.get(), out.data(), &len) != 1 || len != out.size()) {
    fail("x25519 public key extraction failed");
  }
  return out;
}

Key32 x25519_shared(const Key32& private_key, const Key32& peer_public) {
  auto pkey = raw_private(private_key);
  auto peer = raw_public(peer_public);
  if (!pkey || !peer) fail("x25519 key load failed");
  PkeyCtxPtr ctx{EVP_PKEY_CTX_new(pkey.get(), nullptr), EVP_PKEY_CTX_free};
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1) {
    fail("x25519 derive init failed");
  }
  Key32 out{};
  std::size_t len = out.size();
  if (EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    fail("x25519 derive failed");
  }
  return out;
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Key16 hkdf16(std::span<const std::uint8_t> ikm, std::span<const std::uint8_t> salt,
             std::string_view info) {
  PkeyCtxPtr ctx{EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr), EVP_PKEY_CTX_free};
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) != 1 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), reinterpret_cast<const std::uint8_t*>(info.data()),
                                  static_cast<int>(info.size())) != 1) {
    fail("hkdf init failed");
  }
  Key16 out{};
  std::size_t len = out.size();
  if (EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    fail("hkdf derive failed");
  }
  return out;
}

Bytes aes128gcm_encrypt(const Key16& key, const std::array<std::uint8_t, 12>& nonce,
                        std::span<const std::uint8_t> plaintext) {
  CipherCtxPtr ctx{EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free};
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), nonce.data()) != 1) {
    fail("gcm encrypt init failed");
  }
  Bytes out(plaintext.size() + 16);
  int len = 0;
  if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1 ||
      len != static_cast<int>(plaintext.size())) {
    fail("gcm encrypt failed");
  }
  int fin = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1 || fin != 0) {
    fail("gcm encrypt final failed");
  }
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, 16, out.data() + plaintext.size()) != 1) {
    fail("gcm tag extraction failed");
  }
  return out;
}

std::optional<Bytes> aes128gcm_decrypt(const Key16& key,
                                       const std::array<std::uint8_t, 12>& nonce,
                                       std::span<const std::uint8_t> ct_and_tag) {
  if (ct_and_tag.size() < 16) return std::nullopt;
  const std::size_t ct_len = ct_and_tag.size() - 16;
  CipherCtxPtr ctx{EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free};
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(), nonce.data()) != 1) {
    fail("gcm decrypt init failed");
  }
  Bytes out(ct_len);
  int len = 0;
  if (ct_len > 0 &&
      (EVP_DecryptUpdate(ctx.get(), out.data(), &len, ct_and_tag.data(),
                         static_cast<int>(ct_len)) != 1 ||
       len != static_cast<int>(ct_len))) {
    return std::nullopt;
  }
  std::array<std::uint8_t, 16> tag{};
  std::copy(ct_and_tag.begin() + ct_len, ct_and_tag.end(), tag.begin());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, tag.data()) != 1) {
    fail("gcm tag set failed");
  }
  int fin = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
    return std::nullopt;  // authentication failure
  }
  return out;
}

}  // namespace iotrace::crypto
