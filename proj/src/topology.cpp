#include "cits/topology.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <tuple>
#include <utility>

#include "cits/errors.hpp"

namespace cits {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Vehicle: return "Vehicle";
    case NodeKind::RoadsideUnit: return "RoadsideUnit";
    case NodeKind::RsuCloud: return "RsuCloud";
    case NodeKind::CentralCloud: return "CentralCloud";
    case NodeKind::MobileDevice: return "MobileDevice";
    case NodeKind::ExternalProvider: return "ExternalProvider";
    case NodeKind::AttackerDevice: return "AttackerDevice";
  }
  return "?";
}

std::string_view to_string(ProtocolKind protocol) {
  switch (protocol) {
    case ProtocolKind::Mqtt: return "Mqtt";
    case ProtocolKind::ItsG5: return "ItsG5";
    case ProtocolKind::InternetIpv6: return "InternetIpv6";
    case ProtocolKind::Snmpv3: return "Snmpv3";
  }
  return "?";
}

std::optional<NodeKind> node_kind_from_string(std::string_view text) {
  static constexpr std::array kinds{
      NodeKind::Vehicle,      NodeKind::RoadsideUnit,     NodeKind::RsuCloud,
      NodeKind::CentralCloud, NodeKind::MobileDevice,     NodeKind::ExternalProvider,
      NodeKind::AttackerDevice};
  for (auto k : kinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<ProtocolKind> protocol_from_string(std::string_view text) {
  static constexpr std::array protocols{ProtocolKind::Mqtt, ProtocolKind::ItsG5,
                                        ProtocolKind::InternetIpv6, ProtocolKind::Snmpv3};
  for (auto p : protocols) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

bool Node::hosts(std::string_view service) const {
  return std::find(services.begin(), services.end(), service) != services.end();
}

std::optional<std::size_t> SignalPlan::phase_index(std::string_view phase) const {
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i] == phase) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> SignalPlan::phase_serving(std::string_view approach) const {
  for (std::size_t i = 0; i < serves.size(); ++i) {
    if (serves[i].count(std::string(approach))) return i;
  }
  return std::nullopt;
}

int SignalPlan::max_dwell() const {
  int best = 0;
  for (int d : dwell_ticks) best = std::max(best, d);
  return best;
}

bool RoadGraph::has_intersection(std::string_view id) const {
  return std::find(intersections.begin(), intersections.end(), id) != intersections.end();
}

const Segment* RoadGraph::find_segment(std::string_view id) const {
  for (const auto& s : segments) {
    if (s.id() == id) return &s;
  }
  return nullptr;
}

const Node* Topology::find_node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Node& Topology::node(std::string_view id) const {
  if (const auto* n = find_node(id)) return *n;
  throw UnknownNode("unknown node '" + std::string(id) + "'");
}

const Node* Topology::first_of_kind(NodeKind kind) const {
  const Node* best = nullptr;
  for (const auto& n : nodes) {
    if (n.kind == kind && (!best || n.id < best->id)) best = &n;
  }
  return best;
}

const Node* Topology::host_of(std::string_view service) const {
  const Node* best = nullptr;
  for (const auto& n : nodes) {
    if (n.hosts(service) && (!best || n.id < best->id)) best = &n;
  }
  return best;
}

const ParkingLot* Topology::find_lot(std::string_view id) const {
  for (const auto& lot : parking_lots) {
    if (lot.id == id) return &lot;
  }
  return nullptr;
}

namespace {

using KindPair = std::pair<NodeKind, NodeKind>;

bool pair_in(NodeKind x, NodeKind y, std::initializer_list<KindPair> allowed) {
  for (const auto& [p, q] : allowed) {
    if ((x == p && y == q) || (x == q && y == p)) return true;
  }
  return false;
}

bool is_lower_identifier(std::string_view s) {
  if (s.empty()) return false;
  const auto first = static_cast<unsigned char>(s.front());
  if (!std::islower(first) && !std::isdigit(first)) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::islower(u) || std::isdigit(u) || c == '-' || c == '_' || c == '.';
  });
}

void check_node_ref(const Topology& t, const NodeId& id, const std::string& where,
                    std::vector<std::string>& out) {
  if (!t.find_node(id)) out.push_back(where + ": unknown node '" + id + "'");
}

void validate_signal_plan(const Topology& t, const std::string& ix, const SignalPlan& plan,
                          std::vector<std::string>& out) {
  const std::string where = "signal '" + ix + "'";
  if (!t.road_graph.has_intersection(ix)) {
    out.push_back(where + ": unknown intersection");
  }
  if (const auto* ctl = t.find_node(plan.controller)) {
    if (ctl->kind == NodeKind::AttackerDevice) {
      out.push_back(where + ": controller '" + plan.controller + "' is an AttackerDevice");
    } else if (ctl->kind != NodeKind::RoadsideUnit) {
      out.push_back(where + ": controller '" + plan.controller + "' is not a RoadsideUnit");
    } else if (!ctl->hosts("signal-controller")) {
      out.push_back(where + ": controller '" + plan.controller +
                    "' does not host signal-controller");
    }
  } else {
    out.push_back(where + ": unknown controller node '" + plan.controller + "'");
  }
  const auto n = plan.phases.size();
  if (n == 0) out.push_back(where + ": no phases");
  {
    auto sorted = plan.phases;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      out.push_back(where + ": duplicate phase id");
    }
  }
  if (plan.serves.size() != n || plan.dwell_ticks.size() != n || plan.conflict.size() != n) {
    out.push_back(where + ": per-phase tables do not match phase count");
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (plan.conflict[i].size() != n) {
      out.push_back(where + ": conflict row '" + plan.phases[i] + "' has wrong width");
      return;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (plan.conflict[i][i]) {
      out.push_back(where + ": phase '" + plan.phases[i] + "' conflicts with itself");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (plan.conflict[i][j] != plan.conflict[j][i]) {
        out.push_back(where + ": conflict matrix not symmetric at ('" + plan.phases[i] +
                      "','" + plan.phases[j] + "')");
      }
    }
    if (plan.dwell_ticks[i] < 1) {
      out.push_back(where + ": phase '" + plan.phases[i] + "' dwell_ticks must be >= 1");
    }
    for (const auto& a : plan.serves[i]) {
      if (std::find(plan.approaches.begin(), plan.approaches.end(), a) == plan.approaches.end()) {
        out.push_back(where + ": phase '" + plan.phases[i] + "' serves undeclared approach '" +
                      a + "'");
      }
    }
  }
  for (const auto& a : plan.approaches) {
    if (!plan.phase_serving(a)) {
      out.push_back(where + ": approach '" + a + "' served by no phase");
    }
  }
}

}  // namespace

bool protocol_legal(NodeKind x, NodeKind y, ProtocolKind protocol) {
  using K = NodeKind;
  switch (protocol) {
    case ProtocolKind::Mqtt:
      return pair_in(x, y, {{K::RoadsideUnit, K::RsuCloud},
                            {K::Vehicle, K::CentralCloud},
                            {K::AttackerDevice, K::CentralCloud}});
    case ProtocolKind::ItsG5:
      return pair_in(x, y, {{K::RoadsideUnit, K::Vehicle}, {K::RoadsideUnit, K::MobileDevice}});
    case ProtocolKind::InternetIpv6:
      return pair_in(x, y, {{K::RsuCloud, K::CentralCloud},
                            {K::ExternalProvider, K::CentralCloud},
                            {K::AttackerDevice, K::CentralCloud},
                            {K::MobileDevice, K::CentralCloud}});
    case ProtocolKind::Snmpv3:
      return pair_in(x, y, {{K::CentralCloud, K::RoadsideUnit}, {K::RsuCloud, K::RoadsideUnit}});
  }
  return false;
}

std::vector<std::string> validate_topology(const Topology& t) {
  std::vector<std::string> out;

  if (t.schema != 1) out.push_back("schema: unsupported version " + std::to_string(t.schema));

  std::set<NodeId> seen;
  for (const auto& n : t.nodes) {
    if (n.id.empty()) out.push_back("node: empty id");
    if (!seen.insert(n.id).second) out.push_back("node '" + n.id + "': duplicate id");
    for (const auto& sw : n.software) {
      if (!is_lower_identifier(sw.name)) {
        out.push_back("node '" + n.id + "': software name '" + sw.name +
                      "' is not a lowercase identifier");
      }
    }
    for (const auto& s : n.services) {
      if (!known_services().count(s)) {
        out.push_back("node '" + n.id + "': unknown service '" + s + "'");
      }
    }
    if (n.hosts("database") && n.kind != NodeKind::RsuCloud && n.kind != NodeKind::CentralCloud) {
      out.push_back("node '" + n.id + "': database hosted on " + std::string(to_string(n.kind)));
    }
    if (n.hosts("signal-controller") && n.kind != NodeKind::RoadsideUnit) {
      out.push_back("node '" + n.id + "': signal-controller hosted on " +
                    std::string(to_string(n.kind)));
    }
    if (n.kind == NodeKind::AttackerDevice && !n.services.empty()) {
      out.push_back("node '" + n.id + "': AttackerDevice may not host services");
    }
    for (const auto& [svc, count] : n.instances) {
      if (count < 0) {
        out.push_back("node '" + n.id + "': negative instance count for '" + svc + "'");
      }
      if (!n.hosts(svc)) {
        out.push_back("node '" + n.id + "': instances declared for unhosted service '" + svc + "'");
      }
    }
  }

  std::set<std::tuple<NodeId, NodeId, ProtocolKind>> link_keys;
  for (const auto& l : t.links) {
    const std::string name = "link " + l.a + "-" + l.b + "/" + std::string(to_string(l.protocol));
    const auto* a = t.find_node(l.a);
    const auto* b = t.find_node(l.b);
    if (!a) out.push_back(name + ": unknown node '" + l.a + "'");
    if (!b) out.push_back(name + ": unknown node '" + l.b + "'");
    if (l.a == l.b) out.push_back(name + ": self loop");
    if (l.latency_ms < 1) out.push_back(name + ": latency_ms must be >= 1");
    const auto key = l.a < l.b ? std::make_tuple(l.a, l.b, l.protocol)
                               : std::make_tuple(l.b, l.a, l.protocol);
    if (!link_keys.insert(key).second) out.push_back(name + ": duplicate link");
    if (a && b && !protocol_legal(a->kind, b->kind, l.protocol)) {
      out.push_back(name + ": " + std::string(to_string(l.protocol)) + " not permitted between " +
                    std::string(to_string(a->kind)) + " and " + std::string(to_string(b->kind)) +
                    " (protocol legality table)");
    }
  }

  const auto& rg = t.road_graph;
  {
    std::set<std::string> ix;
    for (const auto& i : rg.intersections) {
      if (!ix.insert(i).second) out.push_back("intersection '" + i + "': duplicate id");
    }
    std::set<std::string> seg_ids;
    for (const auto& s : rg.segments) {
      const std::string name = "segment '" + s.id() + "'";
      if (!ix.count(s.from)) out.push_back(name + ": unknown intersection '" + s.from + "'");
      if (!ix.count(s.to)) out.push_back(name + ": unknown intersection '" + s.to + "'");
      if (!(s.cost > 0.0)) out.push_back(name + ": cost must be > 0");
      if (!seg_ids.insert(s.id()).second) out.push_back(name + ": duplicate segment");
    }
    for (const auto& [id, plan] : rg.signals) validate_signal_plan(t, id, plan, out);
  }

  {
    std::set<std::string> lot_ids;
    for (const auto& lot : t.parking_lots) {
      const std::string name = "parking lot '" + lot.id + "'";
      if (!lot_ids.insert(lot.id).second) out.push_back(name + ": duplicate id");
      if (lot.capacity < 1) out.push_back(name + ": capacity must be >= 1");
      if (lot.occupied < 0 || lot.occupied > lot.capacity) {
        out.push_back(name + ": occupied outside [0, capacity]");
      }
      if (lot.price < 0.0) out.push_back(name + ": negative price");
      if (const auto* p = t.find_node(lot.provider)) {
        if (p->kind != NodeKind::ExternalProvider) {
          out.push_back(name + ": provider '" + lot.provider + "' is not an ExternalProvider");
        }
      } else {
        out.push_back(name + ": unknown provider '" + lot.provider + "'");
      }
    }
  }

  for (const auto& e : t.emergency_enrolled) {
    if (const auto* d = t.find_node(e.device)) {
      if (d->kind == NodeKind::AttackerDevice) {
        out.push_back("emergency enrollment '" + e.device + "': AttackerDevice cannot be enrolled");
      }
    } else {
      out.push_back("emergency enrollment: unknown node '" + e.device + "'");
    }
  }

  const auto& w = t.workload;
  if (w.status_period_ms < 1) out.push_back("workload: status_period_ms must be >= 1");
  if (w.status_jitter_ms < 0 || w.status_jitter_ms >= w.status_period_ms) {
    out.push_back("workload: status_jitter_ms must be in [0, status_period_ms)");
  }
  for (const auto& s : w.status_sources) check_node_ref(t, s, "workload status source", out);
  for (const auto& r : w.routes) {
    check_node_ref(t, r.vehicle, "workload route", out);
    if (!rg.has_intersection(r.from)) out.push_back("workload route: unknown intersection '" + r.from + "'");
    if (!rg.has_intersection(r.to)) out.push_back("workload route: unknown intersection '" + r.to + "'");
    if (r.period_ms < 1) out.push_back("workload route: period_ms must be >= 1");
  }
  for (const auto& q : w.parking_queries) {
    check_node_ref(t, q.requester, "workload parking query", out);
    if (!t.find_lot(q.lot)) out.push_back("workload parking query: unknown lot '" + q.lot + "'");
    if (q.period_ms < 1) out.push_back("workload parking query: period_ms must be >= 1");
  }
  for (const auto& f : w.occupancy_feeds) {
    check_node_ref(t, f.provider, "workload occupancy feed", out);
    if (const auto* lot = t.find_lot(f.lot)) {
      for (int v : f.values) {
        if (v < 0 || v > lot->capacity) {
          out.push_back("workload occupancy feed '" + f.lot + "': value outside [0, capacity]");
        }
      }
    } else {
      out.push_back("workload occupancy feed: unknown lot '" + f.lot + "'");
    }
    if (f.values.empty()) out.push_back("workload occupancy feed '" + f.lot + "': no values");
    if (f.period_ms < 1) out.push_back("workload occupancy feed: period_ms must be >= 1");
  }
  for (const auto& inc : w.incidents) {
    check_node_ref(t, inc.provider, "workload incident", out);
    if (!rg.find_segment(inc.segment)) {
      out.push_back("workload incident: unknown segment '" + inc.segment + "'");
    }
    if (inc.penalty < 0.0) out.push_back("workload incident '" + inc.segment + "': negative penalty");
  }
  for (const auto& e : w.emergency) {
    check_node_ref(t, e.device, "workload emergency", out);
    for (const auto& p : e.preemptions) {
      const auto it = rg.signals.find(p.intersection);
      if (it == rg.signals.end()) {
        out.push_back("workload preemption: intersection '" + p.intersection + "' has no signal");
      } else if (!it->second.phase_serving(p.approach)) {
        out.push_back("workload preemption: approach '" + p.approach + "' not served at '" +
                      p.intersection + "'");
      }
    }
  }

  return out;
}

bool protocol_on_path(const Topology& t, std::string_view from, std::string_view to,
                      ProtocolKind protocol) {
  t.node(from);
  t.node(to);
  if (from == to) return false;

  // A simple path ending in a `protocol` hop u->to exists iff u == from or u
  // is reachable from `from` without passing through `to`.
  std::set<NodeId> reached{NodeId(from)};
  std::vector<NodeId> frontier{NodeId(from)};
  while (!frontier.empty()) {
    const NodeId cur = frontier.back();
    frontier.pop_back();
    for (const auto& l : t.links) {
      if (!l.touches(cur)) continue;
      const auto& next = l.other(cur);
      if (next == to) continue;
      if (reached.insert(next).second) frontier.push_back(next);
    }
  }
  return std::any_of(t.links.begin(), t.links.end(), [&](const Link& l) {
    return l.protocol == protocol && l.touches(NodeId(to)) && l.a != l.b &&
           reached.count(l.other(NodeId(to)));
  });
}

bool software_matches(const Topology& t, std::string_view node, std::string_view name,
                      const VersionRange& range) {
  const auto& n = t.node(node);
  return std::any_of(n.software.begin(), n.software.end(), [&](const SoftwareItem& sw) {
    return sw.name == name && range.contains(sw.version);
  });
}

std::vector<Neighbor> neighbors(const Topology& t, std::string_view node) {
  const NodeId id(t.node(node).id);
  std::vector<Neighbor> out;
  for (const auto& l : t.links) {
    if (l.touches(id) && l.a != l.b) out.push_back({l.other(id), l.protocol, l.latency_ms});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& x, const Neighbor& y) {
    return std::tie(x.node, x.protocol, x.latency_ms) < std::tie(y.node, y.protocol, y.latency_ms);
  });
  return out;
}

}  // namespace cits
