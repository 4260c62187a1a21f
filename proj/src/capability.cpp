#include "cits/capability.hpp"

#include <algorithm>
#include <array>

namespace cits {

std::string_view to_string(CapabilityKind kind) {
  switch (kind) {
    case CapabilityKind::NetworkAdjacent: return "NetworkAdjacent";
    case CapabilityKind::DbWrite: return "DbWrite";
    case CapabilityKind::EmergencyRegistered: return "EmergencyRegistered";
    case CapabilityKind::PrivilegedService: return "PrivilegedService";
    case CapabilityKind::SignalControl: return "SignalControl";
    case CapabilityKind::CredentialTheft: return "CredentialTheft";
  }
  return "?";
}

std::optional<CapabilityKind> capability_kind_from_string(std::string_view text) {
  static constexpr std::array kinds{
      CapabilityKind::NetworkAdjacent,   CapabilityKind::DbWrite,
      CapabilityKind::EmergencyRegistered, CapabilityKind::PrivilegedService,
      CapabilityKind::SignalControl,     CapabilityKind::CredentialTheft};
  for (auto k : kinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string Capability::str() const {
  return std::string(to_string(kind)) + "(" + subject + ")";
}

bool CapabilitySet::contains_all(const CapabilitySet& other) const {
  return std::includes(caps_.begin(), caps_.end(), other.caps_.begin(), other.caps_.end());
}

}  // namespace cits
