#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace cits {

enum class CapabilityKind {
  NetworkAdjacent,
  DbWrite,
  EmergencyRegistered,
  PrivilegedService,
  SignalControl,
  CredentialTheft,
};

std::string_view to_string(CapabilityKind kind);
std::optional<CapabilityKind> capability_kind_from_string(std::string_view text);

/// An attacker privilege over one subject (node id, device id or service id).
struct Capability {
  CapabilityKind kind = CapabilityKind::NetworkAdjacent;
  std::string subject;

  /// e.g. "DbWrite(CENTRAL)".
  std::string str() const;

  friend auto operator<=>(const Capability&, const Capability&) = default;
};

/// Grow-only capability set: there is no revoke.
class CapabilitySet {
 public:
  bool has(const Capability& c) const { return caps_.count(c) > 0; }
  bool has(CapabilityKind kind, std::string_view subject) const {
    return has(Capability{kind, std::string(subject)});
  }
  /// Returns true when the capability was not held before.
  bool grant(const Capability& c) { return caps_.insert(c).second; }

  std::size_t size() const { return caps_.size(); }
  bool empty() const { return caps_.empty(); }
  auto begin() const { return caps_.begin(); }
  auto end() const { return caps_.end(); }
  bool contains_all(const CapabilitySet& other) const;

 private:
  std::set<Capability> caps_;
};

}  // namespace cits
