#include <random>

#include "cits/monitor.hpp"
#include "cits/report.hpp"
#include "cits/simulation.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace cits;

namespace {

std::size_t count(const std::vector<Alarm>& alarms, AlarmKind k) {
  return static_cast<std::size_t>(std::count_if(alarms.begin(), alarms.end(), [&](const Alarm& a) { return a.kind == k; }));
}

SimulationResult run(const std::string& topo, const std::string& scenario, std::uint64_t seed = 42) {
  const auto t = fixture(topo);
  SimConfig cfg;
  cfg.seed = seed;
  if (scenario.empty()) return run_simulation(t, cfg);
  const auto b = load_scenario_bundle(kData + "/" + scenario + ".json");
  return run_simulation(t, cfg, &b.catalog, &b.scenario);
}

}  // namespace

TEST_CASE("database integrity") {
  const auto t = fixture("reference");
  Services s(t);
  CHECK(check_db_integrity(s.stored(), s.ground_truth()).empty());
  s.tamper_parking("P1", 0);
  auto a = check_db_integrity(s.stored(), s.ground_truth());
  REQUIRE(a.size() == 1);
  CHECK(a[0].kind == AlarmKind::IntegrityViolation);
  CHECK(a[0].subject == "parking/P1");
  s.tamper_incident("X2->X4", 100);
  a = check_db_integrity(s.stored(), s.ground_truth());
  REQUIRE(a.size() == 2);
  CHECK(a[0].subject == "parking/P1");
  CHECK(a[1].subject == "incidents/X2->X4");
  // Rogue registrations are not an integrity finding.
  CentralDb x, y;
  x.registrations.push_back({"ATTACKER", "c", "CENTRAL", false});
  CHECK(check_db_integrity(x, y).empty());
  x.statuses["VEH-1"] = {"VEH-1", "X1", 1, 1};
  CHECK(check_db_integrity(x, y).at(0).subject == "statuses/VEH-1");
}

TEST_CASE("emergency authenticity") {
  std::vector<EmergencyRegistration> regs{{"AMB-1", "c1", "CENTRAL", true}, {"AMB-2", "c2", "CENTRAL", true}};
  CHECK(check_emergency_auth(regs).empty());
  regs.push_back({"ATTACKER", "c3", "CENTRAL", false});
  const auto a = check_emergency_auth(regs);
  REQUIRE(a.size() == 1);
  CHECK(a[0].kind == AlarmKind::RogueEmergency);
  CHECK(a[0].subject == "ATTACKER");
}

TEST_CASE("route optimality") {
  const auto t = fixture("reference");
  const auto& g = t.road_graph;
  const ServedRoute good{100, "VEH-1", "X1", "X4", {"X1", "X2", "X4"}};
  const ServedRoute bad{200, "VEH-1", "X1", "X4", {"X1", "X3", "X4"}};
  CHECK(check_route_optimality({good}, g, {}).empty());
  const auto a = check_route_optimality({good, bad}, g, {});
  REQUIRE(a.size() == 1);
  CHECK(a[0].kind == AlarmKind::RouteSuboptimal);
  CHECK(a[0].subject == "VEH-1");
  CHECK(a[0].time == 200);
  // Under the real incident the detour is the right answer.
  CHECK(check_route_optimality({bad}, g, {{"X2->X4", 100}}).empty());
  // Unreachable answer for a reachable pair.
  CHECK(check_route_optimality({{0, "VEH-1", "X1", "X4", {}}}, g, {}).size() == 1);
}

TEST_CASE("tampering that leaves the argmin alone raises no route alarm") {
  const auto t = fixture("reference");
  Services s(t);
  s.tamper_incident("X1->X3", 50);
  const auto r = s.ti03_compute_route("X1", "X4");
  CHECK(r.path == std::vector<std::string>{"X1", "X2", "X4"});
  CHECK(check_route_optimality({{0, "VEH-1", "X1", "X4", r.path}}, t.road_graph, s.ground_truth().incidents).empty());
  s.tamper_incident("X2->X4", 100);
  const auto r2 = s.ti03_compute_route("X1", "X4");
  CHECK(check_route_optimality({{0, "VEH-1", "X1", "X4", r2.path}}, t.road_graph, s.ground_truth().incidents).size() == 1);
}

TEST_CASE("signal safety on an un-attacked controller") {
  const auto t = fixture("reference");
  for (const auto& [x, plan] : t.road_graph.signals) {
    SignalController c(x, plan);
    std::vector<PhaseRecord> h;
    for (int i = 1; i <= 1000; ++i) {
      if (i % 137 == 0) c.request_preemption(static_cast<std::uint64_t>(i), plan.approaches[static_cast<std::size_t>(i) % plan.approaches.size()]);
      h.push_back(c.step(i * 100));
    }
    std::set<std::uint64_t> legit;
    for (int i = 137; i <= 1000; i += 137) legit.insert(static_cast<std::uint64_t>(i));
    CHECK(check_signal_safety(x, plan, h, 2, legit).empty());
  }
}

TEST_CASE("a hold override denies a legitimate preemption") {
  const auto t = fixture("reference");
  const auto& plan = t.road_graph.signals.at("X1");
  SignalController c("X1", plan);
  CapabilitySet caps;
  caps.grant({CapabilityKind::SignalControl, "RSU-1"});
  REQUIRE(c.submit_override({OverrideMode::Hold, {1}, 60, "ATTACKER"}, caps));
  c.request_preemption(1, "N");
  std::vector<PhaseRecord> h;
  for (int i = 1; i <= 100; ++i) h.push_back(c.step(i * 100));
  const auto a = check_signal_safety("X1", plan, h, 2, {1});
  REQUIRE(count(a, AlarmKind::PreemptionDenial) == 1);
  CHECK(count(a, AlarmKind::ConflictingGreen) == 0);
  // Arrival tick 1, latency 2, one dwell of 30.
  CHECK(a[0].time == 3300);
  // Not legitimate: no denial alarm.
  CHECK(check_signal_safety("X1", plan, h, 2, {}).empty());
}

TEST_CASE("S1 run: integrity and route alarms") {
  const auto r = run("scenario1", "attack_s1");
  CHECK(count(r.alarms, AlarmKind::IntegrityViolation) == 2);
  CHECK(count(r.alarms, AlarmKind::RouteSuboptimal) >= 1);
  for (const auto& a : r.alarms) CHECK(a.cause_step == 1u);
}

TEST_CASE("S2 run: rogue registration and conflicting green") {
  const auto r = run("scenario2", "attack_s2");
  CHECK(count(r.alarms, AlarmKind::RogueEmergency) == 1);
  CHECK(count(r.alarms, AlarmKind::ConflictingGreen) >= 1);
  const auto d = run("scenario2", "attack_s2_denial");
  CHECK(count(d.alarms, AlarmKind::PreemptionDenial) >= 1);
}

TEST_CASE("clean runs raise nothing") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) CHECK(run("reference", "", seed).alarms.empty());
}

TEST_CASE("report document") {
  const auto s1 = run("scenario1", "attack_s1");
  const auto j = nlohmann::json::parse(report_json(s1));
  CHECK(j["scenario"] == "S1");
  CHECK(j["counts"]["steps_succeeded"] == 2);
  CHECK(j["counts"]["alarms"].get<int>() >= 2);
  CHECK(j["steps"].size() == 2);
  CHECK(j["steps"][1]["cve"] == "CVE-2022-30927");
  CHECK(j["alarms"][0]["cause_cve"] == "CVE-2022-30927");
  CHECK(report_json(s1) == report_json(run("scenario1", "attack_s1")));

  // Field order is fixed.
  const auto text = report_json(s1);
  CHECK(text.find("\"scenario\"") < text.find("\"seed\""));
  CHECK(text.find("\"steps\"") < text.find("\"alarms\""));
  CHECK(text.find("\"alarms\"") < text.find("\"counts\""));

  const auto empty = run("empty", "");
  const auto e = nlohmann::json::parse(report_json(empty));
  CHECK(e["scenario"].is_null());
  CHECK(e["steps"].empty());
  CHECK(e["alarms"].empty());
  CHECK(e["counts"]["alarms"] == 0);
  CHECK(e["counts"]["steps_succeeded"] == 0);
  for (const auto& [k, v] : e["counts"]["by_kind"].items()) CHECK(v == 0);
  CHECK(e["run"]["messages_sent"] == 0);

  const auto txt = report_text(s1);
  CHECK(txt.find("CVE-2022-30927: Succeeded") != std::string::npos);
}
