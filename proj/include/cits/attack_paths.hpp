#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cits/attack.hpp"

namespace cits {

/// Search target: a capability (optionally pinned to one subject) or a
/// world effect.
struct AttackGoal {
  std::optional<CapabilityKind> capability;
  std::optional<std::string> subject;
  std::optional<EffectKind> effect;

  /// Accepts "signal-control", "db-write:CENTRAL", "SignalControl(RSU-1)",
  /// "effect:db-tamper", "RegisterRogueEmergency" and similar. Throws
  /// ParseError.
  static AttackGoal parse(std::string_view text);

  bool satisfied(const CapabilitySet& caps, const std::set<EffectKind>& effects) const;
  std::string str() const;
};

/// A catalog entry with every variable bound to a node.
struct GroundStep {
  std::string cve;
  Bindings bindings;
  Precondition precondition;
  std::vector<Capability> grants;
  std::vector<EffectKind> effects;
  /// Position in ground_catalog order.
  std::size_t index = 0;
};

/// Every binding of each entry's variables to nodes of the declared kind,
/// in catalog order then binding order (variables by name, nodes by id).
std::vector<GroundStep> ground_catalog(const VulnCatalog& catalog, const Topology& topology,
                                       const NodeId& attacker);

struct AttackPath {
  std::vector<GroundStep> steps;

  /// "CVE-a → CVE-b → CVE-c".
  std::string chain() const;
  std::vector<std::size_t> indices() const;
};

/// All minimal feasible step sequences of length <= depth reaching `goal`.
///
/// Feasible: each step's precondition holds given the capabilities granted
/// by the steps before it. Minimal: no strict order-preserving subsequence
/// is itself feasible and reaches the goal. Sorted by length, then by
/// ground step indices.
std::vector<AttackPath> enumerate_attack_paths(const Topology& topology, const VulnCatalog& catalog,
                                               const NodeId& attacker, const AttackGoal& goal,
                                               int depth = 4);

}  // namespace cits
