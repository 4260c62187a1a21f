#include <random>

#include "cits/errors.hpp"
#include "cits/topology.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cits;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& what) {
  for (const auto& s : v) {
    if (s.find(what) != std::string::npos) return true;
  }
  return false;
}

Node make_node(const std::string& id, NodeKind kind) {
  Node n;
  n.id = id;
  n.kind = kind;
  return n;
}

}  // namespace

TEST_CASE("reference topology loads and validates") {
  const auto t = fixture("reference");
  CHECK(t.nodes.size() == 8);
  CHECK(validate_topology(t).empty());
  int vehicles = 0, rsus = 0;
  for (const auto& n : t.nodes) {
    vehicles += n.kind == NodeKind::Vehicle;
    rsus += n.kind == NodeKind::RoadsideUnit;
  }
  CHECK(vehicles == 2);
  CHECK(rsus == 2);
  CHECK(t.road_graph.intersections.size() == 5);
  for (const auto* name : {"scenario1", "scenario2"}) CHECK(validate_topology(fixture(name)).empty());
}

TEST_CASE("empty topology is valid") {
  const auto t = fixture("empty");
  CHECK(t.nodes.empty());
  CHECK(t.links.empty());
}

TEST_CASE("dangling link reference is a ValidationError naming the node") {
  try {
    load_topology(kData + "/invalid_dangling.json");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
  CHECK(validate_topology(parse_topology_file(kData + "/invalid_dangling.json")).size() == 1);
}

TEST_CASE("malformed input is a ParseError") {
  CHECK_THROWS_AS(load_topology_text("{"), ParseError);
  CHECK_THROWS_AS(load_topology_text(R"({"schema": 2, "nodes": []})"), ParseError);
  CHECK_THROWS_AS(load_topology_text(R"({"nodes": []})"), ParseError);
  CHECK_THROWS_AS(load_topology_text(R"({"schema": 1, "nodes": [{"id": "A", "kind": "Spaceship"}]})"), ParseError);
  CHECK_THROWS_AS(load_topology(kData + "/does-not-exist.json"), IoError);
}

TEST_CASE("validation names each breach") {
  Topology t;
  t.nodes = {make_node("C", NodeKind::CentralCloud), make_node("V", NodeKind::Vehicle)};

  SUBCASE("forbidden protocol cites the legality table") {
    t.links = {{"C", "V", ProtocolKind::ItsG5, 20}};
    const auto v = validate_topology(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("legality table") != std::string::npos);
  }
  SUBCASE("duplicate node id") {
    t.nodes.push_back(make_node("V", NodeKind::Vehicle));
    const auto v = validate_topology(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("V") != std::string::npos);
  }
  SUBCASE("self loop, bad latency, duplicate link") {
    t.links = {{"V", "V", ProtocolKind::Mqtt, 20}};
    CHECK(mentions(validate_topology(t), "V"));
    t.links = {{"C", "V", ProtocolKind::Mqtt, 0}};
    CHECK(mentions(validate_topology(t), "latency"));
    t.links = {{"C", "V", ProtocolKind::Mqtt, 5}, {"V", "C", ProtocolKind::Mqtt, 7}};
    CHECK(validate_topology(t).size() == 1);
  }
  SUBCASE("database only on clouds") {
    t.nodes[1].services = {"database"};
    CHECK(mentions(validate_topology(t), "database"));
  }
  SUBCASE("attacker in a service role") {
    t.nodes.push_back(make_node("A", NodeKind::AttackerDevice));
    t.nodes.back().services = {"pm01"};
    CHECK(mentions(validate_topology(t), "A"));
  }
  SUBCASE("parking lot fed by an attacker") {
    t.nodes.push_back(make_node("A", NodeKind::AttackerDevice));
    t.parking_lots = {{"P", 10, 3, 1.0, "A"}};
    CHECK(mentions(validate_topology(t), "P"));
  }
  SUBCASE("occupancy above capacity") {
    t.nodes.push_back(make_node("E", NodeKind::ExternalProvider));
    t.parking_lots = {{"P", 10, 11, 1.0, "E"}};
    CHECK(mentions(validate_topology(t), "P"));
  }
  SUBCASE("segment endpoints and costs") {
    t.road_graph.intersections = {"X"};
    t.road_graph.segments = {{"X", "Y", 1}, {"X", "X", -1}};
    CHECK(validate_topology(t).size() >= 2);
  }
}

TEST_CASE("signal plan invariants") {
  auto t = fixture("reference");
  auto& plan = t.road_graph.signals.at("X1");
  SUBCASE("asymmetric conflict") {
    plan.conflict[0][1] = false;
    CHECK(mentions(validate_topology(t), "X1"));
  }
  SUBCASE("true diagonal") {
    plan.conflict[0][0] = true;
    CHECK(mentions(validate_topology(t), "X1"));
  }
  SUBCASE("unserved approach") {
    plan.approaches.push_back("SW");
    CHECK(mentions(validate_topology(t), "SW"));
  }
  SUBCASE("zero dwell") {
    plan.dwell_ticks[0] = 0;
    CHECK(mentions(validate_topology(t), "X1"));
  }
}

TEST_CASE("serialize then load is a fixed point") {
  for (const auto* name : {"reference", "scenario1", "scenario2", "empty"}) {
    const auto t = fixture(name);
    const auto once = serialize_topology(t);
    const auto twice = serialize_topology(load_topology_text(once));
    CHECK(once == twice);
  }
}

TEST_CASE("protocol_on_path examples") {
  auto t = fixture("scenario1");
  CHECK(protocol_on_path(t, "ATTACKER", "CENTRAL", ProtocolKind::InternetIpv6));
  CHECK_FALSE(protocol_on_path(t, "ATTACKER", "CENTRAL", ProtocolKind::Mqtt));
  CHECK(protocol_on_path(t, "CENTRAL", "RSU-1", ProtocolKind::Snmpv3));
  CHECK_FALSE(protocol_on_path(t, "CENTRAL", "RSU-2", ProtocolKind::Snmpv3));
  CHECK_FALSE(protocol_on_path(t, "CENTRAL", "CENTRAL", ProtocolKind::Mqtt));
  CHECK_THROWS_AS(protocol_on_path(t, "ghost", "CENTRAL", ProtocolKind::Mqtt), UnknownNode);
  std::erase_if(t.links, [](const Link& l) { return l.touches("ATTACKER"); });
  CHECK_FALSE(protocol_on_path(t, "ATTACKER", "CENTRAL", ProtocolKind::InternetIpv6));

  Topology chain;
  chain.nodes = {make_node("A", NodeKind::Vehicle), make_node("B", NodeKind::RoadsideUnit),
                 make_node("C", NodeKind::RsuCloud)};
  chain.links = {{"A", "B", ProtocolKind::ItsG5, 20}, {"B", "C", ProtocolKind::Mqtt, 50}};
  const bool want = oracle::protocol_on_path(chain, "A", "C", ProtocolKind::Mqtt);
  CHECK(want);
  CHECK(protocol_on_path(chain, "A", "C", ProtocolKind::Mqtt) == want);
  CHECK_FALSE(protocol_on_path(chain, "C", "A", ProtocolKind::Mqtt));
}

TEST_CASE("protocol_on_path agrees with path enumeration on small graphs") {
  std::mt19937_64 rng(11);
  const std::vector<ProtocolKind> protocols{ProtocolKind::Mqtt, ProtocolKind::ItsG5, ProtocolKind::InternetIpv6,
                                            ProtocolKind::Snmpv3};
  int mismatches = 0, positives = 0, queries = 0;
  for (int round = 0; round < 400; ++round) {
    Topology t;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) t.nodes.push_back(make_node("N" + std::to_string(i), NodeKind::Vehicle));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (auto p : protocols) {
          if (rng() % 6 == 0) t.links.push_back({"N" + std::to_string(i), "N" + std::to_string(j), p, 1});
        }
      }
    }
    for (const auto& a : t.nodes) {
      for (const auto& b : t.nodes) {
        for (auto p : protocols) {
          const bool want = oracle::protocol_on_path(t, a.id, b.id, p);
          mismatches += protocol_on_path(t, a.id, b.id, p) != want;
          positives += want;
          ++queries;
        }
      }
    }
  }
  CHECK(mismatches == 0);
  CHECK(positives > queries / 10);
}

TEST_CASE("software_matches") {
  const auto t = fixture("scenario2");
  const VersionRange spring({VersionInterval{Version::parse("5.2.0"), Version::parse("5.2.16")},
                             VersionInterval{Version::parse("5.3.0"), Version::parse("5.3.7")}});
  CHECK(software_matches(t, "CENTRAL", "spring-framework", spring));
  auto patched = t;
  for (auto& n : patched.nodes) {
    for (auto& s : n.software) {
      if (s.name == "spring-framework") s.version = Version::parse("5.3.7");
    }
  }
  CHECK_FALSE(software_matches(patched, "CENTRAL", "spring-framework", spring));
  CHECK_FALSE(software_matches(t, "VEH-1", "spring-framework", VersionRange::any()));
  CHECK_THROWS_AS(software_matches(t, "ghost", "x", VersionRange::any()), UnknownNode);
}

TEST_CASE("neighbors are sorted and keep multiplicity") {
  const auto t = fixture("reference");
  const auto rsu = neighbors(t, "RSU-1");
  bool mqtt_to_cloud = false;
  for (const auto& n : rsu) mqtt_to_cloud |= n.node == "RSUCLOUD-1" && n.protocol == ProtocolKind::Mqtt;
  CHECK(mqtt_to_cloud);
  for (std::size_t i = 1; i < rsu.size(); ++i) {
    CHECK(std::tie(rsu[i - 1].node, rsu[i - 1].protocol) <= std::tie(rsu[i].node, rsu[i].protocol));
  }
  int to_cloud = 0;
  for (const auto& n : rsu) to_cloud += n.node == "RSUCLOUD-1";
  CHECK(to_cloud == 2);  // Mqtt and Snmpv3

  Topology lone;
  lone.nodes = {make_node("X", NodeKind::Vehicle)};
  CHECK(neighbors(lone, "X").empty());
  CHECK_THROWS_AS(neighbors(lone, "Y"), UnknownNode);
}
