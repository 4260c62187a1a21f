#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cits/capability.hpp"
#include "cits/signal.hpp"
#include "cits/topology.hpp"

namespace cits {

// Terms inside atoms, grants and bindings are node/service ids or variables
// written "$name". The variable "$attacker" is always bound to the
// scenario's attacker.

struct ProtocolPathAtom {
  std::string from;
  std::string to;
  ProtocolKind protocol = ProtocolKind::Mqtt;
};

struct SoftwareAtom {
  std::string node;
  std::string name;
  VersionRange range;
};

struct HasAtom {
  Capability capability;
};

using Atom = std::variant<ProtocolPathAtom, SoftwareAtom, HasAtom>;

/// e.g. "ProtocolPath(ATTACKER,CENTRAL,InternetIpv6)".
std::string describe(const Atom& atom);

struct Precondition {
  std::vector<Atom> atoms;
};

enum class EffectKind { DbTamper, RegisterRogueEmergency, InjectSignalCommand };

std::string_view to_string(EffectKind kind);
std::optional<EffectKind> effect_kind_from_string(std::string_view text);

struct VulnEntry {
  std::string cve_id;
  std::string summary;
  /// Variable name (without '$') -> required node kind.
  std::map<std::string, NodeKind> variables;
  Precondition precondition;
  std::vector<Capability> grants;
  std::vector<EffectKind> effects;
};

class VulnCatalog {
 public:
  VulnCatalog() = default;
  /// Throws DuplicateCve.
  explicit VulnCatalog(std::vector<VulnEntry> entries);

  const std::vector<VulnEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const VulnEntry* find(std::string_view cve) const;

 private:
  std::vector<VulnEntry> entries_;
};

/// Throws IoError, ParseError, DuplicateCve.
VulnCatalog load_vuln_catalog(const std::filesystem::path& path);
VulnCatalog parse_vuln_catalog_text(std::string_view json_text);

using Bindings = std::map<std::string, std::string>;

/// Substitutes "$var" terms. Throws ScenarioError on an unbound variable.
std::string ground_term(const std::string& term, const Bindings& bindings);
Atom ground(const Atom& atom, const Bindings& bindings);
Precondition ground(const Precondition& p, const Bindings& bindings);
Capability ground(const Capability& c, const Bindings& bindings);

struct PreconditionVerdict {
  bool holds = true;
  /// First failing atom in declaration order.
  std::optional<Atom> failing;
};

/// Atoms must be ground. Atoms naming unknown nodes, or still carrying a
/// variable, fail. No side effects.
PreconditionVerdict eval_precondition(const Precondition& p, const Topology& t,
                                      const CapabilitySet& caps);
bool eval_atom(const Atom& atom, const Topology& t, const CapabilitySet& caps);

struct DbMutation {
  std::string table;  // "parking" or "incidents"
  std::string key;
  double value = 0.0;
};

struct SignalCommand {
  std::string intersection;
  OverrideMode mode = OverrideMode::DualGreen;
  std::vector<std::string> phases;
  int duration_ticks = 1;
};

/// Concrete parameters for a step's world effects.
struct EffectParams {
  std::vector<DbMutation> db_tamper;
  std::optional<SignalCommand> signal_command;
};

struct ScenarioStep {
  std::string cve;
  Bindings bindings;
  Millis at_ms = 0;
  EffectParams params;
};

struct Scenario {
  std::string id;
  NodeId attacker;
  /// Catalog path as written in the file (relative to the scenario file).
  std::string catalog;
  std::vector<ScenarioStep> steps;
};

/// Throws IoError, ParseError (including non-increasing step times).
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(std::string_view json_text);

enum class StepStatus { Pending, Succeeded, PreconditionFailed, NotReached };

std::string_view to_string(StepStatus s);

struct StepVerdict {
  StepStatus status = StepStatus::Pending;
  std::string failing_atom;
  Millis evaluated_at = 0;
};

struct CapabilityGrant {
  Millis time = 0;
  Capability capability;
  std::size_t step = 0;
};

struct AttackOutcome {
  std::vector<StepVerdict> steps;
  std::vector<CapabilityGrant> timeline;
};

/// Receives the world effects of a successful step.
class EffectSink {
 public:
  virtual ~EffectSink() = default;
  virtual void db_tamper(std::size_t step, const DbMutation& mutation) = 0;
  virtual void register_rogue_emergency(std::size_t step, const NodeId& device) = 0;
  virtual void inject_signal_command(std::size_t step, const SignalCommand& command,
                                     const NodeId& issuer) = 0;
};

/// Per-run attack state: capability set, verdicts and the effect gate.
class AttackRunner {
 public:
  /// Throws UnknownCve, UnknownNode, ScenarioError.
  AttackRunner(const VulnCatalog& catalog, Scenario scenario, const Topology& topology);

  const Scenario& scenario() const { return scenario_; }
  const CapabilitySet& capabilities() const { return caps_; }
  const AttackOutcome& outcome() const { return outcome_; }
  const Precondition& grounded_precondition(std::size_t step) const { return grounded_[step]; }

  /// Evaluates step `index` at time `now`. Grants and effects are applied
  /// only when the precondition holds; a step after a failed one is
  /// NotReached.
  const StepVerdict& apply_step(std::size_t index, Millis now, EffectSink& sink);

 private:
  const VulnCatalog* catalog_;
  Scenario scenario_;
  const Topology* topology_;
  std::vector<Precondition> grounded_;
  CapabilitySet caps_;
  AttackOutcome outcome_;
  bool chain_broken_ = false;
};

}  // namespace cits
