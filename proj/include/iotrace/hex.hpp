#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iotrace {

std::string to_hex(const std::uint8_t* data, std::size_t len);

inline std::string to_hex(const std::vector<std::uint8_t>& v) {
  return to_hex(v.data(), v.size());
}

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& a) {
  return to_hex(a.data(), N);
}

// Lowercase hex only; returns nullopt on odd length or non-hex characters.
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view s);

template <std::size_t N>
std::optional<std::array<std::uint8_t, N>> from_hex_exact(std::string_view s) {
  auto bytes = from_hex(s);
  if (!bytes || bytes->size() != N) return std::nullopt;
  std::array<std::uint8_t, N> out{};
  std::copy(bytes->begin(), bytes->end(), out.begin());
  return out;
}

}  // namespace iotrace
