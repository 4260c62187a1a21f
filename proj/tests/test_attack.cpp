#include <algorithm>

#include "cits/attack.hpp"
#include "cits/errors.hpp"
#include "cits/services.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cits;

namespace {

struct Sink : EffectSink {
  std::vector<std::string> log;
  Services* services = nullptr;
  CapabilitySet* caps = nullptr;

  void db_tamper(std::size_t step, const DbMutation& m) override {
    log.push_back(std::to_string(step) + ":tamper:" + m.table + "/" + m.key);
    if (!services) return;
    if (m.table == "parking") services->tamper_parking(m.key, static_cast<int>(m.value));
    if (m.table == "incidents") services->tamper_incident(m.key, m.value);
  }
  void register_rogue_emergency(std::size_t step, const NodeId& device) override {
    log.push_back(std::to_string(step) + ":rogue:" + device);
    if (services && caps) services->ps03_register_emergency(device, "", *caps);
  }
  void inject_signal_command(std::size_t step, const SignalCommand& c, const NodeId& issuer) override {
    log.push_back(std::to_string(step) + ":signal:" + c.intersection + ":" + issuer);
  }
};

VulnCatalog catalog() { return load_vuln_catalog(kData + "/cves.json"); }
Scenario s1() { return load_scenario(kData + "/attack_s1.json"); }
Scenario s2() { return load_scenario(kData + "/attack_s2.json"); }

void drop_links(Topology& t, const NodeId& node, ProtocolKind p) {
  std::erase_if(t.links, [&](const Link& l) { return l.touches(node) && l.protocol == p; });
}

}  // namespace

TEST_CASE("catalog loading") {
  const auto c = catalog();
  CHECK(c.size() == 5);
  for (const auto* id : {"CVE-2020-27338", "CVE-2022-30927", "CVE-2019-5432", "CVE-2021-22118", "CVE-2022-43870"}) {
    CHECK(c.find(id) != nullptr);
  }
  CHECK(c.find("CVE-0000-0000") == nullptr);
  CHECK(parse_vuln_catalog_text("[]").empty());
  const char* dup = R"([{"cve":"CVE-1","precondition":{"atoms":[]},"grants":[],"effects":[]},
                        {"cve":"CVE-1","precondition":{"atoms":[]},"grants":[],"effects":[]}])";
  CHECK_THROWS_AS(parse_vuln_catalog_text(dup), DuplicateCve);
  CHECK_THROWS_AS(parse_vuln_catalog_text("{"), ParseError);
  CHECK_THROWS_AS(load_vuln_catalog(kData + "/nope.json"), IoError);
}

TEST_CASE("CVE-2021-22118 version range") {
  const auto c = catalog();
  const auto* e = c.find("CVE-2021-22118");
  REQUIRE(e);
  const auto& sw = std::get<SoftwareAtom>(e->precondition.atoms[1]);
  CHECK(sw.range.contains(Version::parse("5.2.14")));
  CHECK(sw.range.contains(Version::parse("5.3.6")));
  CHECK_FALSE(sw.range.contains(Version::parse("5.2.16")));
  CHECK_FALSE(sw.range.contains(Version::parse("5.3.7")));
  CHECK_FALSE(sw.range.contains(Version::parse("5.1.9")));
}

TEST_CASE("eval_precondition") {
  const auto c = catalog();
  const Bindings b{{"attacker", "ATTACKER"}, {"target", "CENTRAL"}};
  auto t = fixture("scenario2");
  const auto p = ground(c.find("CVE-2019-5432")->precondition, b);
  CHECK(eval_precondition(p, t, {}).holds);

  drop_links(t, "ATTACKER", ProtocolKind::Mqtt);
  const auto v = eval_precondition(p, t, {});
  CHECK_FALSE(v.holds);
  REQUIRE(v.failing);
  CHECK(describe(*v.failing) == "ProtocolPath(ATTACKER,CENTRAL,Mqtt)");

  const Precondition has{{HasAtom{{CapabilityKind::DbWrite, "CENTRAL"}}}};
  const auto h = eval_precondition(has, t, {});
  CHECK_FALSE(h.holds);
  CHECK(describe(*h.failing) == "Has(DbWrite(CENTRAL))");
  CapabilitySet caps;
  caps.grant({CapabilityKind::DbWrite, "CENTRAL"});
  CHECK(eval_precondition(has, t, caps).holds);

  // First failing atom in declaration order, with both failing.
  const Precondition two{{ProtocolPathAtom{"ATTACKER", "CENTRAL", ProtocolKind::Mqtt}, HasAtom{{CapabilityKind::DbWrite, "CENTRAL"}}}};
  CHECK(std::holds_alternative<ProtocolPathAtom>(*eval_precondition(two, t, {}).failing));

  CHECK(eval_precondition(Precondition{}, t, {}).holds);
  CHECK_FALSE(eval_atom(ProtocolPathAtom{"ghost", "CENTRAL", ProtocolKind::Mqtt}, t, {}));
  CHECK_FALSE(eval_atom(ProtocolPathAtom{"$attacker", "CENTRAL", ProtocolKind::Mqtt}, t, {}));
  CHECK_THROWS_AS(ground_term("$nobody", b), ScenarioError);
  CHECK(ground_term("$target", b) == "CENTRAL");
  CHECK(ground_term("RSU-1", b) == "RSU-1");
}

TEST_CASE("S1 step 2 tampers the served database only") {
  const auto t = fixture("scenario1");
  const auto c = catalog();
  AttackRunner r(c, s1(), t);
  Services svc(t);
  Sink sink;
  sink.services = &svc;
  CHECK(svc.stored().parking.at("P1").occupied == 8);
  CHECK(r.apply_step(0, 3000, sink).status == StepStatus::Succeeded);
  CHECK(r.capabilities().has(CapabilityKind::NetworkAdjacent, "CENTRAL"));
  CHECK(sink.log.empty());
  CHECK(r.apply_step(1, 4000, sink).status == StepStatus::Succeeded);
  CHECK(r.capabilities().has(CapabilityKind::DbWrite, "CENTRAL"));
  CHECK(sink.log == std::vector<std::string>{"1:tamper:parking/P1", "1:tamper:incidents/X2->X4"});
  CHECK(svc.stored().parking.at("P1").occupied == 0);
  CHECK(svc.ground_truth().parking.at("P1").occupied == 8);
  CHECK(svc.stored().incidents.at("X2->X4") == 100);
  CHECK(svc.ground_truth().incidents.count("X2->X4") == 0);
  REQUIRE(r.outcome().timeline.size() == 2);
  CHECK(r.outcome().timeline[1].time == 4000);
  CHECK(r.outcome().timeline[1].step == 1);
}

TEST_CASE("S1 without MySQL fails step 2 and applies nothing") {
  auto t = fixture("scenario1");
  for (auto& n : t.nodes) {
    if (n.id == "CENTRAL") std::erase_if(n.software, [](const SoftwareItem& s) { return s.name == "mysql"; });
  }
  const auto c = catalog();
  AttackRunner r(c, s1(), t);
  Sink sink;
  CHECK(r.apply_step(0, 3000, sink).status == StepStatus::Succeeded);
  const auto& v = r.apply_step(1, 4000, sink);
  CHECK(v.status == StepStatus::PreconditionFailed);
  CHECK(v.failing_atom.rfind("Software(CENTRAL,mysql", 0) == 0);
  CHECK(sink.log.empty());
  CHECK_FALSE(r.capabilities().has(CapabilityKind::DbWrite, "CENTRAL"));
}

TEST_CASE("S2 steps and their gates") {
  const auto t = fixture("scenario2");
  const auto c = catalog();
  Services svc(t);
  {
    AttackRunner r(c, s2(), t);
    Sink sink;
    CapabilitySet caps;
    sink.services = &svc;
    const auto& v = r.apply_step(0, 5000, sink);
    CHECK(v.status == StepStatus::Succeeded);
    CHECK(r.capabilities().has(CapabilityKind::EmergencyRegistered, "ATTACKER"));
    caps = r.capabilities();
    sink.caps = &caps;
    sink.register_rogue_emergency(0, "ATTACKER");
    const auto* reg = svc.find_registration("ATTACKER");
    REQUIRE(reg);
    CHECK_FALSE(reg->legitimate);
    CHECK(r.apply_step(1, 6000, sink).status == StepStatus::Succeeded);
    CHECK(r.apply_step(2, 8000, sink).status == StepStatus::Succeeded);
    CHECK(r.capabilities().has(CapabilityKind::SignalControl, "RSU-1"));
    CHECK(sink.log.back() == "2:signal:X1:ATTACKER");
  }
  {
    // Step 3 on its own: no PrivilegedService yet.
    AttackRunner r(c, s2(), t);
    Sink sink;
    const auto& v = r.apply_step(2, 8000, sink);
    CHECK(v.status == StepStatus::PreconditionFailed);
    CHECK(v.failing_atom == "Has(PrivilegedService(traffic-management))");
    CHECK(sink.log.empty());
    CHECK(r.capabilities().empty());
  }
}

TEST_CASE("steps after a failed step are not reached") {
  auto t = fixture("scenario2");
  drop_links(t, "ATTACKER", ProtocolKind::Mqtt);
  t.links.push_back({"ATTACKER", "CENTRAL", ProtocolKind::InternetIpv6, 30});
  const auto c = catalog();
  AttackRunner r(c, s2(), t);
  Sink sink;
  CHECK(r.apply_step(0, 5000, sink).status == StepStatus::PreconditionFailed);
  CHECK(r.apply_step(1, 6000, sink).status == StepStatus::NotReached);
  CHECK(r.apply_step(2, 8000, sink).status == StepStatus::NotReached);
  CHECK(sink.log.empty());
  CHECK(r.capabilities().empty());
}

TEST_CASE("capabilities only grow") {
  const auto t = fixture("scenario2");
  const auto c = catalog();
  AttackRunner r(c, s2(), t);
  Sink sink;
  CapabilitySet before;
  for (std::size_t i = 0; i < 3; ++i) {
    r.apply_step(i, 5000 + static_cast<Millis>(i) * 1000, sink);
    CHECK(r.capabilities().contains_all(before));
    CHECK(r.capabilities().size() > before.size());
    before = r.capabilities();
  }
  CapabilitySet cs;
  CHECK(cs.grant({CapabilityKind::DbWrite, "X"}));
  CHECK_FALSE(cs.grant({CapabilityKind::DbWrite, "X"}));
  CHECK(cs.size() == 1);
}

TEST_CASE("scenario validation") {
  const auto t = fixture("scenario2");
  const auto c = catalog();
  auto bad = s2();
  bad.steps[0].cve = "CVE-1999-0001";
  CHECK_THROWS_AS(AttackRunner(c, bad, t), UnknownCve);
  bad = s2();
  bad.attacker = "ghost";
  CHECK_THROWS_AS(AttackRunner(c, bad, t), UnknownNode);
  bad = s2();
  bad.steps[2].bindings["rsu"] = "ghost";
  CHECK_THROWS_AS(AttackRunner(c, bad, t), UnknownNode);
  bad = s2();
  bad.steps[2].bindings.erase("rsu");
  CHECK_THROWS_AS(AttackRunner(c, bad, t), ScenarioError);

  const char* same_time = R"({"scenario":{"id":"x","attacker":"A","steps":[
      {"cve":"CVE-1","bindings":{},"at_ms":10},{"cve":"CVE-2","bindings":{},"at_ms":10}]}})";
  CHECK_THROWS_AS(parse_scenario_text(same_time), ParseError);
  const auto sc = parse_scenario_text(R"({"scenario":{"id":"x","attacker":"A","steps":[]}})");
  CHECK(sc.steps.empty());
  CHECK(sc.attacker == "A");
}
