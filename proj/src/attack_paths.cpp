#include "cits/attack_paths.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "cits/errors.hpp"

namespace cits {

namespace {

std::string normalize(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

struct Replay {
  bool feasible = true;
  CapabilitySet caps;
  std::set<EffectKind> effects;
};

Replay replay(const Topology& t, const std::vector<const GroundStep*>& seq) {
  Replay r;
  for (const auto* s : seq) {
    if (!eval_precondition(s->precondition, t, r.caps).holds) {
      r.feasible = false;
      return r;
    }
    for (const auto& g : s->grants) r.caps.grant(g);
    r.effects.insert(s->effects.begin(), s->effects.end());
  }
  return r;
}

bool minimal(const Topology& t, const std::vector<const GroundStep*>& seq, const AttackGoal& goal) {
  const std::size_t n = seq.size();
  // Every strict subsequence, including the empty one.
  for (std::uint32_t mask = 0; mask + 1 < (1u << n); ++mask) {
    std::vector<const GroundStep*> sub;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) sub.push_back(seq[i]);
    }
    const auto r = replay(t, sub);
    if (r.feasible && goal.satisfied(r.caps, r.effects)) return false;
  }
  return true;
}

}  // namespace

AttackGoal AttackGoal::parse(std::string_view text) {
  std::string body(text);
  std::optional<std::string> subject;
  if (const auto open = body.find('('); open != std::string::npos && body.back() == ')') {
    subject = body.substr(open + 1, body.size() - open - 2);
    body = body.substr(0, open);
  } else if (const auto colon = body.find(':'); colon != std::string::npos) {
    subject = body.substr(colon + 1);
    body = body.substr(0, colon);
    if (normalize(body) == "effect") {
      body = *subject;
      subject.reset();
    }
  }
  if (subject && subject->empty()) subject.reset();
  const auto key = normalize(body);
  AttackGoal g;
  for (auto k : {CapabilityKind::NetworkAdjacent, CapabilityKind::DbWrite, CapabilityKind::EmergencyRegistered,
                 CapabilityKind::PrivilegedService, CapabilityKind::SignalControl,
                 CapabilityKind::CredentialTheft}) {
    if (normalize(to_string(k)) == key) {
      g.capability = k;
      g.subject = subject;
      return g;
    }
  }
  for (auto e : {EffectKind::DbTamper, EffectKind::RegisterRogueEmergency, EffectKind::InjectSignalCommand}) {
    if (normalize(to_string(e)) == key) {
      if (subject) throw ParseError("effect goals take no subject: '" + std::string(text) + "'");
      g.effect = e;
      return g;
    }
  }
  throw ParseError("unknown goal '" + std::string(text) + "'");
}

bool AttackGoal::satisfied(const CapabilitySet& caps, const std::set<EffectKind>& effects) const {
  if (effect) return effects.count(*effect) > 0;
  if (!capability) return false;
  return std::any_of(caps.begin(), caps.end(), [&](const Capability& c) {
    return c.kind == *capability && (!subject || c.subject == *subject);
  });
}

std::string AttackGoal::str() const {
  if (effect) return std::string(to_string(*effect));
  if (!capability) return "?";
  return std::string(to_string(*capability)) + "(" + subject.value_or("*") + ")";
}

std::vector<GroundStep> ground_catalog(const VulnCatalog& catalog, const Topology& topology,
                                       const NodeId& attacker) {
  std::vector<GroundStep> out;
  for (const auto& entry : catalog.entries()) {
    std::vector<std::string> vars;
    std::vector<std::vector<NodeId>> candidates;
    for (const auto& [var, kind] : entry.variables) {
      vars.push_back(var);
      std::vector<NodeId> ids;
      for (const auto& n : topology.nodes) {
        if (n.kind == kind) ids.push_back(n.id);
      }
      std::sort(ids.begin(), ids.end());
      candidates.push_back(std::move(ids));
    }
    Bindings b{{"attacker", attacker}};
    std::function<void(std::size_t)> assign = [&](std::size_t i) {
      if (i == vars.size()) {
        GroundStep g;
        g.cve = entry.cve_id;
        g.bindings = b;
        g.precondition = ground(entry.precondition, b);
        for (const auto& c : entry.grants) g.grants.push_back(ground(c, b));
        g.effects = entry.effects;
        g.index = out.size();
        out.push_back(std::move(g));
        return;
      }
      for (const auto& id : candidates[i]) {
        b[vars[i]] = id;
        assign(i + 1);
      }
      b.erase(vars[i]);
    };
    try {
      assign(0);
    } catch (const ScenarioError&) {
      // An entry mentioning a variable it does not declare cannot be grounded.
    }
  }
  return out;
}

std::string AttackPath::chain() const {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += " → ";
    out += steps[i].cve;
  }
  return out;
}

std::vector<std::size_t> AttackPath::indices() const {
  std::vector<std::size_t> out;
  for (const auto& s : steps) out.push_back(s.index);
  return out;
}

std::vector<AttackPath> enumerate_attack_paths(const Topology& topology, const VulnCatalog& catalog,
                                               const NodeId& attacker, const AttackGoal& goal,
                                               int depth) {
  const auto steps = ground_catalog(catalog, topology, attacker);
  std::vector<AttackPath> found;
  std::vector<const GroundStep*> seq;
  std::vector<bool> used(steps.size(), false);

  // Depth-first forward search. A prefix that already reaches the goal is
  // not extended: any extension has that prefix as a goal-reaching strict
  // subsequence. A step that adds no capability and whose effects do not
  // reach the goal is skipped for the same reason.
  std::function<void(const CapabilitySet&, const std::set<EffectKind>&)> dfs =
      [&](const CapabilitySet& caps, const std::set<EffectKind>& effects) {
        if (static_cast<int>(seq.size()) >= depth) return;
        for (const auto& s : steps) {
          if (used[s.index]) continue;
          if (!eval_precondition(s.precondition, topology, caps).holds) continue;
          CapabilitySet next_caps = caps;
          bool grew = false;
          for (const auto& g : s.grants) grew = next_caps.grant(g) || grew;
          auto next_effects = effects;
          next_effects.insert(s.effects.begin(), s.effects.end());
          const bool reached = goal.satisfied(next_caps, next_effects);
          if (!grew && !reached) continue;
          seq.push_back(&s);
          used[s.index] = true;
          if (reached) {
            if (minimal(topology, seq, goal)) {
              AttackPath p;
              for (const auto* x : seq) p.steps.push_back(*x);
              found.push_back(std::move(p));
            }
          } else {
            dfs(next_caps, next_effects);
          }
          used[s.index] = false;
          seq.pop_back();
        }
      };
  if (!goal.satisfied(CapabilitySet{}, {})) dfs(CapabilitySet{}, {});

  std::sort(found.begin(), found.end(), [](const AttackPath& a, const AttackPath& b) {
    if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
    return a.indices() < b.indices();
  });
  return found;
}

}  // namespace cits
