// JSON reader/writer for the topology file format (schema 1).

#include <fstream>
#include <sstream>

#include "cits/errors.hpp"
#include "cits/json_util.hpp"
#include "cits/topology.hpp"

namespace cits {

namespace {

using json::JsonValue;
using json::get_opt;
using json::get_req;

SoftwareItem parse_software(const JsonValue& j, const std::string& where) {
  SoftwareItem sw;
  sw.name = get_req<std::string>(j, "name", where);
  sw.version = Version::parse(get_req<std::string>(j, "version", where));
  return sw;
}

Node parse_node(const JsonValue& j) {
  Node n;
  n.id = get_req<std::string>(j, "id", "node");
  const std::string where = "node '" + n.id + "'";
  const auto kind = get_req<std::string>(j, "kind", where);
  const auto k = node_kind_from_string(kind);
  if (!k) throw ParseError(where + ": unknown kind '" + kind + "'");
  n.kind = *k;
  for (const auto& s : json::array_or_empty(j, "software", where)) {
    n.software.push_back(parse_software(s, where + " software"));
  }
  for (const auto& s : json::array_or_empty(j, "services", where)) {
    if (!s.is_string()) throw ParseError(where + ": services must be strings");
    n.services.push_back(s.get<std::string>());
  }
  if (j.contains("instances")) {
    const auto& inst = j.at("instances");
    if (!inst.is_object()) throw ParseError(where + ": instances must be an object");
    for (const auto& [svc, count] : inst.items()) {
      if (!count.is_number_integer()) throw ParseError(where + ": instance count must be an integer");
      n.instances[svc] = count.get<int>();
    }
  }
  return n;
}

Link parse_link(const JsonValue& j) {
  Link l;
  l.a = get_req<std::string>(j, "a", "link");
  l.b = get_req<std::string>(j, "b", "link");
  const std::string where = "link " + l.a + "-" + l.b;
  const auto proto = get_req<std::string>(j, "protocol", where);
  const auto p = protocol_from_string(proto);
  if (!p) throw ParseError(where + ": unknown protocol '" + proto + "'");
  l.protocol = *p;
  l.latency_ms = get_req<Millis>(j, "latency_ms", where);
  return l;
}

SignalPlan parse_signal(const JsonValue& j, const std::string& where) {
  SignalPlan plan;
  plan.controller = get_req<std::string>(j, "controller", where);
  plan.phases = get_req<std::vector<std::string>>(j, "phases", where);
  plan.approaches = get_req<std::vector<std::string>>(j, "approaches", where);
  const auto& serves = json::require_object(j, "serves", where);
  const auto& dwell = json::require_object(j, "dwell_ticks", where);
  for (const auto& ph : plan.phases) {
    if (!serves.contains(ph)) throw ParseError(where + ": serves missing phase '" + ph + "'");
    if (!dwell.contains(ph)) throw ParseError(where + ": dwell_ticks missing phase '" + ph + "'");
    const auto list = json::convert<std::vector<std::string>>(serves.at(ph), where + " serves");
    plan.serves.emplace_back(list.begin(), list.end());
    plan.dwell_ticks.push_back(json::convert<int>(dwell.at(ph), where + " dwell_ticks"));
  }
  plan.conflict = get_req<std::vector<std::vector<bool>>>(j, "conflict", where);
  return plan;
}

RoadGraph parse_road_graph(const JsonValue& j) {
  RoadGraph rg;
  rg.intersections = get_opt<std::vector<std::string>>(j, "intersections", "road_graph").value_or(
      std::vector<std::string>{});
  for (const auto& s : json::array_or_empty(j, "segments", "road_graph")) {
    Segment seg;
    seg.from = get_req<std::string>(s, "from", "segment");
    seg.to = get_req<std::string>(s, "to", "segment");
    seg.cost = get_req<double>(s, "cost", "segment " + seg.from + "->" + seg.to);
    rg.segments.push_back(seg);
  }
  if (j.contains("signals")) {
    const auto& sig = json::require_object(j, "signals", "road_graph");
    for (const auto& [ix, plan] : sig.items()) {
      rg.signals.emplace(ix, parse_signal(plan, "signal '" + ix + "'"));
    }
  }
  return rg;
}

ParkingLot parse_lot(const JsonValue& j) {
  ParkingLot lot;
  lot.id = get_req<std::string>(j, "id", "parking lot");
  const std::string where = "parking lot '" + lot.id + "'";
  lot.capacity = get_req<int>(j, "capacity", where);
  lot.occupied = get_opt<int>(j, "occupied", where).value_or(0);
  lot.price = get_opt<double>(j, "price", where).value_or(0.0);
  lot.provider = get_req<std::string>(j, "provider", where);
  return lot;
}

Workload parse_workload(const JsonValue& j) {
  const std::string where = "workload";
  Workload w;
  w.status_period_ms = get_opt<Millis>(j, "status_period_ms", where).value_or(w.status_period_ms);
  w.status_jitter_ms = get_opt<Millis>(j, "status_jitter_ms", where).value_or(w.status_jitter_ms);
  w.status_sources = get_opt<std::vector<std::string>>(j, "status_sources", where)
                         .value_or(std::vector<std::string>{});
  for (const auto& r : json::array_or_empty(j, "routes", where)) {
    RouteWorkload x;
    x.vehicle = get_req<std::string>(r, "vehicle", "workload route");
    x.from = get_req<std::string>(r, "from", "workload route");
    x.to = get_req<std::string>(r, "to", "workload route");
    x.start_ms = get_opt<Millis>(r, "start_ms", "workload route").value_or(0);
    x.period_ms = get_req<Millis>(r, "period_ms", "workload route");
    w.routes.push_back(x);
  }
  for (const auto& q : json::array_or_empty(j, "parking_queries", where)) {
    ParkingQueryWorkload x;
    x.requester = get_req<std::string>(q, "requester", "workload parking query");
    x.lot = get_req<std::string>(q, "lot", "workload parking query");
    x.start_ms = get_opt<Millis>(q, "start_ms", "workload parking query").value_or(0);
    x.period_ms = get_req<Millis>(q, "period_ms", "workload parking query");
    w.parking_queries.push_back(x);
  }
  for (const auto& f : json::array_or_empty(j, "occupancy_feeds", where)) {
    OccupancyFeed x;
    x.provider = get_req<std::string>(f, "provider", "workload occupancy feed");
    x.lot = get_req<std::string>(f, "lot", "workload occupancy feed");
    x.start_ms = get_opt<Millis>(f, "start_ms", "workload occupancy feed").value_or(0);
    x.period_ms = get_req<Millis>(f, "period_ms", "workload occupancy feed");
    x.values = get_req<std::vector<int>>(f, "values", "workload occupancy feed");
    w.occupancy_feeds.push_back(x);
  }
  for (const auto& i : json::array_or_empty(j, "incidents", where)) {
    IncidentReport x;
    x.provider = get_req<std::string>(i, "provider", "workload incident");
    x.segment = get_req<std::string>(i, "segment", "workload incident");
    x.penalty = get_req<double>(i, "penalty", "workload incident");
    x.at_ms = get_req<Millis>(i, "at_ms", "workload incident");
    w.incidents.push_back(x);
  }
  for (const auto& e : json::array_or_empty(j, "emergency", where)) {
    EmergencyWorkload x;
    x.device = get_req<std::string>(e, "device", "workload emergency");
    x.register_at_ms = get_opt<Millis>(e, "register_at_ms", "workload emergency").value_or(0);
    for (const auto& p : json::array_or_empty(e, "preemptions", "workload emergency")) {
      PreemptionWorkload pw;
      pw.at_ms = get_req<Millis>(p, "at_ms", "workload preemption");
      pw.intersection = get_req<std::string>(p, "intersection", "workload preemption");
      pw.approach = get_req<std::string>(p, "approach", "workload preemption");
      x.preemptions.push_back(pw);
    }
    w.emergency.push_back(x);
  }
  return w;
}

Topology parse_topology_json(const JsonValue& j) {
  if (!j.is_object()) throw ParseError("topology: top level must be an object");
  Topology t;
  if (!j.contains("schema")) throw ParseError("topology: missing 'schema'");
  t.schema = get_req<int>(j, "schema", "topology");
  if (t.schema != 1) throw ParseError("topology: unsupported schema " + std::to_string(t.schema));
  t.name = get_opt<std::string>(j, "name", "topology").value_or("");
  for (const auto& n : json::array_or_empty(j, "nodes", "topology")) t.nodes.push_back(parse_node(n));
  for (const auto& l : json::array_or_empty(j, "links", "topology")) t.links.push_back(parse_link(l));
  if (j.contains("road_graph")) t.road_graph = parse_road_graph(json::require_object(j, "road_graph", "topology"));
  for (const auto& p : json::array_or_empty(j, "parking_lots", "topology")) {
    t.parking_lots.push_back(parse_lot(p));
  }
  for (const auto& e : json::array_or_empty(j, "emergency_enrolled", "topology")) {
    t.emergency_enrolled.push_back({get_req<std::string>(e, "device", "emergency enrollment"),
                                    get_req<std::string>(e, "proof", "emergency enrollment")});
  }
  if (j.contains("workload")) t.workload = parse_workload(json::require_object(j, "workload", "topology"));
  return t;
}

Topology validated(Topology t) {
  const auto violations = validate_topology(t);
  if (!violations.empty()) {
    std::string msg = "topology '" + t.name + "' invalid:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
  return t;
}

}  // namespace

Topology parse_topology_text(std::string_view json_text) {
  return parse_topology_json(json::parse_text(json_text, "topology"));
}

Topology parse_topology_file(const std::filesystem::path& path) {
  return parse_topology_text(json::read_file(path));
}

Topology load_topology(const std::filesystem::path& path) {
  return validated(parse_topology_file(path));
}

Topology load_topology_text(std::string_view json_text) {
  return validated(parse_topology_text(json_text));
}

std::string serialize_topology(const Topology& t) {
  using Ordered = nlohmann::ordered_json;
  Ordered j;
  j["schema"] = t.schema;
  j["name"] = t.name;
  j["nodes"] = Ordered::array();
  for (const auto& n : t.nodes) {
    Ordered node;
    node["id"] = n.id;
    node["kind"] = std::string(to_string(n.kind));
    node["software"] = Ordered::array();
    for (const auto& sw : n.software) {
      node["software"].push_back(Ordered{{"name", sw.name}, {"version", sw.version.str()}});
    }
    node["services"] = n.services;
    if (!n.instances.empty()) {
      Ordered inst = Ordered::object();
      for (const auto& [svc, count] : n.instances) inst[svc] = count;
      node["instances"] = inst;
    }
    j["nodes"].push_back(node);
  }
  j["links"] = Ordered::array();
  for (const auto& l : t.links) {
    j["links"].push_back(Ordered{{"a", l.a},
                                 {"b", l.b},
                                 {"protocol", std::string(to_string(l.protocol))},
                                 {"latency_ms", l.latency_ms}});
  }
  Ordered rg;
  rg["intersections"] = t.road_graph.intersections;
  rg["segments"] = Ordered::array();
  for (const auto& s : t.road_graph.segments) {
    rg["segments"].push_back(Ordered{{"from", s.from}, {"to", s.to}, {"cost", s.cost}});
  }
  rg["signals"] = Ordered::object();
  for (const auto& [ix, plan] : t.road_graph.signals) {
    Ordered p;
    p["controller"] = plan.controller;
    p["phases"] = plan.phases;
    p["approaches"] = plan.approaches;
    Ordered serves = Ordered::object();
    Ordered dwell = Ordered::object();
    for (std::size_t i = 0; i < plan.phases.size(); ++i) {
      if (i < plan.serves.size()) {
        serves[plan.phases[i]] = std::vector<std::string>(plan.serves[i].begin(), plan.serves[i].end());
      }
      if (i < plan.dwell_ticks.size()) dwell[plan.phases[i]] = plan.dwell_ticks[i];
    }
    p["serves"] = serves;
    p["conflict"] = plan.conflict;
    p["dwell_ticks"] = dwell;
    rg["signals"][ix] = p;
  }
  j["road_graph"] = rg;
  j["parking_lots"] = Ordered::array();
  for (const auto& lot : t.parking_lots) {
    j["parking_lots"].push_back(Ordered{{"id", lot.id},
                                        {"capacity", lot.capacity},
                                        {"occupied", lot.occupied},
                                        {"price", lot.price},
                                        {"provider", lot.provider}});
  }
  j["emergency_enrolled"] = Ordered::array();
  for (const auto& e : t.emergency_enrolled) {
    j["emergency_enrolled"].push_back(Ordered{{"device", e.device}, {"proof", e.proof}});
  }
  const auto& w = t.workload;
  Ordered wj;
  wj["status_period_ms"] = w.status_period_ms;
  wj["status_jitter_ms"] = w.status_jitter_ms;
  wj["status_sources"] = w.status_sources;
  wj["routes"] = Ordered::array();
  for (const auto& r : w.routes) {
    wj["routes"].push_back(Ordered{{"vehicle", r.vehicle},
                                   {"from", r.from},
                                   {"to", r.to},
                                   {"start_ms", r.start_ms},
                                   {"period_ms", r.period_ms}});
  }
  wj["parking_queries"] = Ordered::array();
  for (const auto& q : w.parking_queries) {
    wj["parking_queries"].push_back(Ordered{{"requester", q.requester},
                                            {"lot", q.lot},
                                            {"start_ms", q.start_ms},
                                            {"period_ms", q.period_ms}});
  }
  wj["occupancy_feeds"] = Ordered::array();
  for (const auto& f : w.occupancy_feeds) {
    wj["occupancy_feeds"].push_back(Ordered{{"provider", f.provider},
                                            {"lot", f.lot},
                                            {"start_ms", f.start_ms},
                                            {"period_ms", f.period_ms},
                                            {"values", f.values}});
  }
  wj["incidents"] = Ordered::array();
  for (const auto& i : w.incidents) {
    wj["incidents"].push_back(Ordered{{"provider", i.provider},
                                      {"segment", i.segment},
                                      {"penalty", i.penalty},
                                      {"at_ms", i.at_ms}});
  }
  wj["emergency"] = Ordered::array();
  for (const auto& e : w.emergency) {
    Ordered ej{{"device", e.device}, {"register_at_ms", e.register_at_ms}};
    ej["preemptions"] = Ordered::array();
    for (const auto& p : e.preemptions) {
      ej["preemptions"].push_back(Ordered{{"at_ms", p.at_ms},
                                          {"intersection", p.intersection},
                                          {"approach", p.approach}});
    }
    wj["emergency"].push_back(ej);
  }
  j["workload"] = wj;
  return j.dump(2) + "\n";
}

}  // namespace cits
