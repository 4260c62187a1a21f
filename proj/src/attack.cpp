#include "cits/attack.hpp"

#include <set>

#include "cits/errors.hpp"
#include "cits/json_util.hpp"

namespace cits {

namespace {

using json::JsonValue;
using json::get_opt;
using json::get_req;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

VersionRange parse_range(const JsonValue& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "any") return VersionRange::any();
  if (!j.is_array()) throw ParseError(where + ": range must be an array of intervals or \"any\"");
  std::vector<VersionInterval> intervals;
  for (const auto& iv : j) {
    VersionInterval v;
    if (auto lo = get_opt<std::string>(iv, "from", where)) v.lo = Version::parse(*lo);
    if (auto hi = get_opt<std::string>(iv, "to", where)) v.hi = Version::parse(*hi);
    intervals.push_back(v);
  }
  return VersionRange(std::move(intervals));
}

Capability parse_capability(const JsonValue& j, const std::string& where) {
  const auto kind = get_req<std::string>(j, "kind", where);
  const auto k = capability_kind_from_string(kind);
  if (!k) throw ParseError(where + ": unknown capability kind '" + kind + "'");
  return Capability{*k, get_req<std::string>(j, "subject", where)};
}

Atom parse_atom(const JsonValue& j, const std::string& where) {
  const auto type = get_req<std::string>(j, "type", where);
  if (type == "ProtocolPath") {
    const auto proto = get_req<std::string>(j, "protocol", where);
    const auto p = protocol_from_string(proto);
    if (!p) throw ParseError(where + ": unknown protocol '" + proto + "'");
    return ProtocolPathAtom{get_req<std::string>(j, "from", where), get_req<std::string>(j, "to", where), *p};
  }
  if (type == "Software") {
    if (!j.contains("range")) throw ParseError(where + ": missing 'range'");
    return SoftwareAtom{get_req<std::string>(j, "node", where), get_req<std::string>(j, "name", where),
                        parse_range(j.at("range"), where + ".range")};
  }
  if (type == "Has") {
    if (!j.contains("capability")) throw ParseError(where + ": missing 'capability'");
    return HasAtom{parse_capability(j.at("capability"), where + ".capability")};
  }
  throw ParseError(where + ": unknown atom type '" + type + "'");
}

VulnEntry parse_entry(const JsonValue& j) {
  VulnEntry e;
  e.cve_id = get_req<std::string>(j, "cve", "catalog entry");
  const std::string where = "catalog '" + e.cve_id + "'";
  e.summary = get_opt<std::string>(j, "summary", where).value_or("");
  if (j.contains("variables")) {
    const auto& vars = json::require_object(j, "variables", where);
    for (const auto& [name, kind] : vars.items()) {
      const auto k = node_kind_from_string(json::convert<std::string>(kind, where + ".variables"));
      if (!k) throw ParseError(where + ": variable '" + name + "' has unknown node kind");
      if (name == "attacker") throw ParseError(where + ": 'attacker' is implicitly bound");
      e.variables[name] = *k;
    }
  }
  if (j.contains("precondition")) {
    for (const auto& a : json::array_or_empty(j.at("precondition"), "atoms", where + ".precondition")) {
      e.precondition.atoms.push_back(parse_atom(a, where + " atom"));
    }
  }
  for (const auto& g : json::array_or_empty(j, "grants", where)) {
    e.grants.push_back(parse_capability(g, where + " grant"));
  }
  for (const auto& f : json::array_or_empty(j, "effects", where)) {
    const auto kind = json::convert<std::string>(f.is_object() ? f.at("kind") : f, where + " effect");
    const auto k = effect_kind_from_string(kind);
    if (!k) throw ParseError(where + ": unknown effect '" + kind + "'");
    e.effects.push_back(*k);
  }
  return e;
}

EffectParams parse_params(const JsonValue& j, const std::string& where) {
  EffectParams p;
  for (const auto& m : json::array_or_empty(j, "db_tamper", where)) {
    p.db_tamper.push_back(DbMutation{get_req<std::string>(m, "table", where + ".db_tamper"),
                                     get_req<std::string>(m, "key", where + ".db_tamper"),
                                     get_req<double>(m, "value", where + ".db_tamper")});
  }
  if (j.contains("signal_command")) {
    const auto& c = j.at("signal_command");
    SignalCommand cmd;
    cmd.intersection = get_req<std::string>(c, "intersection", where + ".signal_command");
    const auto mode = get_opt<std::string>(c, "mode", where + ".signal_command").value_or("dual_green");
    const auto m = override_mode_from_string(mode);
    if (!m) throw ParseError(where + ": unknown override mode '" + mode + "'");
    cmd.mode = *m;
    cmd.phases = get_req<std::vector<std::string>>(c, "phases", where + ".signal_command");
    cmd.duration_ticks = get_req<int>(c, "duration_ticks", where + ".signal_command");
    p.signal_command = cmd;
  }
  return p;
}

}  // namespace

std::string describe(const Atom& atom) {
  return std::visit(
      Overloaded{
          [](const ProtocolPathAtom& a) {
            return "ProtocolPath(" + a.from + "," + a.to + "," + std::string(to_string(a.protocol)) + ")";
          },
          [](const SoftwareAtom& a) {
            return "Software(" + a.node + "," + a.name + "," + a.range.str() + ")";
          },
          [](const HasAtom& a) { return "Has(" + a.capability.str() + ")"; },
      },
      atom);
}

std::string_view to_string(EffectKind kind) {
  switch (kind) {
    case EffectKind::DbTamper: return "DbTamper";
    case EffectKind::RegisterRogueEmergency: return "RegisterRogueEmergency";
    case EffectKind::InjectSignalCommand: return "InjectSignalCommand";
  }
  return "?";
}

std::optional<EffectKind> effect_kind_from_string(std::string_view text) {
  for (auto k : {EffectKind::DbTamper, EffectKind::RegisterRogueEmergency,
                 EffectKind::InjectSignalCommand}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(StepStatus s) {
  switch (s) {
    case StepStatus::Pending: return "Pending";
    case StepStatus::Succeeded: return "Succeeded";
    case StepStatus::PreconditionFailed: return "PreconditionFailed";
    case StepStatus::NotReached: return "NotReached";
  }
  return "?";
}

VulnCatalog::VulnCatalog(std::vector<VulnEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> ids;
  for (const auto& e : entries_) {
    if (!ids.insert(e.cve_id).second) throw DuplicateCve("duplicate catalog entry '" + e.cve_id + "'");
  }
}

const VulnEntry* VulnCatalog::find(std::string_view cve) const {
  for (const auto& e : entries_) {
    if (e.cve_id == cve) return &e;
  }
  return nullptr;
}

VulnCatalog parse_vuln_catalog_text(std::string_view json_text) {
  const auto j = json::parse_text(json_text, "catalog");
  if (!j.is_array()) throw ParseError("catalog: top level must be an array");
  std::vector<VulnEntry> entries;
  for (const auto& e : j) entries.push_back(parse_entry(e));
  return VulnCatalog(std::move(entries));
}

VulnCatalog load_vuln_catalog(const std::filesystem::path& path) {
  return parse_vuln_catalog_text(json::read_file(path));
}

Scenario parse_scenario_text(std::string_view json_text) {
  const auto root = json::parse_text(json_text, "scenario");
  const auto& j = json::require_object(root, "scenario", "scenario file");
  Scenario s;
  s.id = get_req<std::string>(j, "id", "scenario");
  s.attacker = get_req<std::string>(j, "attacker", "scenario");
  s.catalog = get_opt<std::string>(j, "catalog", "scenario").value_or("");
  for (const auto& st : json::array_or_empty(j, "steps", "scenario")) {
    ScenarioStep step;
    step.cve = get_req<std::string>(st, "cve", "scenario step");
    const std::string where = "scenario step '" + step.cve + "'";
    step.bindings = get_opt<Bindings>(st, "bindings", where).value_or(Bindings{});
    step.at_ms = get_req<Millis>(st, "at_ms", where);
    if (st.contains("params")) step.params = parse_params(st.at("params"), where + ".params");
    if (!s.steps.empty() && step.at_ms <= s.steps.back().at_ms) {
      throw ParseError(where + ": step times must be strictly increasing");
    }
    if (step.at_ms < 0) throw ParseError(where + ": negative at_ms");
    s.steps.push_back(std::move(step));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario_text(json::read_file(path));
}

std::string ground_term(const std::string& term, const Bindings& bindings) {
  if (term.empty() || term.front() != '$') return term;
  const auto it = bindings.find(term.substr(1));
  if (it == bindings.end()) throw ScenarioError("unbound variable '" + term + "'");
  return it->second;
}

Capability ground(const Capability& c, const Bindings& bindings) {
  return Capability{c.kind, ground_term(c.subject, bindings)};
}

Atom ground(const Atom& atom, const Bindings& bindings) {
  return std::visit(
      Overloaded{
          [&](const ProtocolPathAtom& a) -> Atom {
            return ProtocolPathAtom{ground_term(a.from, bindings), ground_term(a.to, bindings), a.protocol};
          },
          [&](const SoftwareAtom& a) -> Atom {
            return SoftwareAtom{ground_term(a.node, bindings), a.name, a.range};
          },
          [&](const HasAtom& a) -> Atom { return HasAtom{ground(a.capability, bindings)}; },
      },
      atom);
}

Precondition ground(const Precondition& p, const Bindings& bindings) {
  Precondition out;
  for (const auto& a : p.atoms) out.atoms.push_back(ground(a, bindings));
  return out;
}

bool eval_atom(const Atom& atom, const Topology& t, const CapabilitySet& caps) {
  const auto bound = [&](const std::string& id) {
    return !id.empty() && id.front() != '$' && t.find_node(id) != nullptr;
  };
  return std::visit(
      Overloaded{
          [&](const ProtocolPathAtom& a) {
            return bound(a.from) && bound(a.to) && protocol_on_path(t, a.from, a.to, a.protocol);
          },
          [&](const SoftwareAtom& a) { return bound(a.node) && software_matches(t, a.node, a.name, a.range); },
          [&](const HasAtom& a) { return caps.has(a.capability); },
      },
      atom);
}

PreconditionVerdict eval_precondition(const Precondition& p, const Topology& t,
                                      const CapabilitySet& caps) {
  for (const auto& atom : p.atoms) {
    if (!eval_atom(atom, t, caps)) return PreconditionVerdict{false, atom};
  }
  return PreconditionVerdict{true, std::nullopt};
}

AttackRunner::AttackRunner(const VulnCatalog& catalog, Scenario scenario, const Topology& topology)
    : catalog_(&catalog), scenario_(std::move(scenario)), topology_(&topology) {
  topology.node(scenario_.attacker);
  for (const auto& step : scenario_.steps) {
    const auto* entry = catalog.find(step.cve);
    if (!entry) throw UnknownCve("scenario references unknown '" + step.cve + "'");
    Bindings b = step.bindings;
    b["attacker"] = scenario_.attacker;
    for (const auto& [var, id] : b) topology.node(id);
    for (const auto& [var, kind] : entry->variables) {
      const auto it = b.find(var);
      if (it == b.end()) {
        throw ScenarioError(step.cve + ": variable '$" + var + "' is not bound");
      }
      if (topology.node(it->second).kind != kind) {
        throw ScenarioError(step.cve + ": '$" + var + "' bound to '" + it->second + "' which is not a " +
                            std::string(to_string(kind)));
      }
    }
    grounded_.push_back(ground(entry->precondition, b));
  }
  outcome_.steps.resize(scenario_.steps.size());
}

const StepVerdict& AttackRunner::apply_step(std::size_t index, Millis now, EffectSink& sink) {
  auto& verdict = outcome_.steps.at(index);
  verdict.evaluated_at = now;
  if (chain_broken_) {
    verdict.status = StepStatus::NotReached;
    return verdict;
  }
  const auto& step = scenario_.steps[index];
  const auto result = eval_precondition(grounded_[index], *topology_, caps_);
  if (!result.holds) {
    verdict.status = StepStatus::PreconditionFailed;
    verdict.failing_atom = describe(*result.failing);
    chain_broken_ = true;
    return verdict;
  }
  verdict.status = StepStatus::Succeeded;

  const auto* entry = catalog_->find(step.cve);
  Bindings b = step.bindings;
  b["attacker"] = scenario_.attacker;
  for (const auto& g : entry->grants) {
    const auto cap = ground(g, b);
    if (caps_.grant(cap)) outcome_.timeline.push_back({now, cap, index});
  }
  for (auto effect : entry->effects) {
    switch (effect) {
      case EffectKind::DbTamper:
        for (const auto& m : step.params.db_tamper) sink.db_tamper(index, m);
        break;
      case EffectKind::RegisterRogueEmergency:
        sink.register_rogue_emergency(index, scenario_.attacker);
        break;
      case EffectKind::InjectSignalCommand:
        if (step.params.signal_command) {
          sink.inject_signal_command(index, *step.params.signal_command, scenario_.attacker);
        }
        break;
    }
  }
  return verdict;
}

}  // namespace cits
