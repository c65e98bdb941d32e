#include "iotrace/protocol.hpp"

namespace iotrace {

const char* to_string(ProtocolMode m) {
  switch (m) {
    case ProtocolMode::centralized: return "centralized";
    case ProtocolMode::decentralized: return "decentralized";
    case ProtocolMode::privacy_enhanced: return "privacy_enhanced";
  }
  return "unknown";
}

std::optional<ProtocolMode> mode_from_string(std::string_view s) {
  if (s == "centralized") return ProtocolMode::centralized;
  if (s == "decentralized") return ProtocolMode::decentralized;
  if (s == "privacy_enhanced") return ProtocolMode::privacy_enhanced;
  return std::nullopt;
}

}  // namespace iotrace
