#include <random>

#include "cits/attack_paths.hpp"
#include "cits/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cits;

namespace {

VulnCatalog catalog() { return load_vuln_catalog(kData + "/cves.json"); }

std::vector<std::string> chains(const std::vector<AttackPath>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.chain());
  return out;
}

}  // namespace

TEST_CASE("goal parsing") {
  auto g = AttackGoal::parse("signal-control");
  CHECK(g.capability == CapabilityKind::SignalControl);
  CHECK_FALSE(g.subject);
  g = AttackGoal::parse("db-write:CENTRAL");
  CHECK(g.capability == CapabilityKind::DbWrite);
  CHECK(g.subject == "CENTRAL");
  g = AttackGoal::parse("SignalControl(RSU-1)");
  CHECK(g.subject == "RSU-1");
  g = AttackGoal::parse("effect:db-tamper");
  CHECK(g.effect == EffectKind::DbTamper);
  CHECK_FALSE(g.capability);
  CHECK(AttackGoal::parse("RegisterRogueEmergency").effect == EffectKind::RegisterRogueEmergency);
  CHECK_THROWS_AS(AttackGoal::parse("world-domination"), ParseError);
  CHECK_THROWS_AS(AttackGoal::parse(""), ParseError);

  CapabilitySet caps;
  caps.grant({CapabilityKind::SignalControl, "RSU-2"});
  CHECK(AttackGoal::parse("signal-control").satisfied(caps, {}));
  CHECK_FALSE(AttackGoal::parse("SignalControl(RSU-1)").satisfied(caps, {}));
  CHECK(AttackGoal::parse("effect:db-tamper").satisfied({}, {EffectKind::DbTamper}));
}

TEST_CASE("grounding binds variables to nodes of the declared kind") {
  const auto t = fixture("scenario2");
  const auto steps = ground_catalog(catalog(), t, "ATTACKER");
  // One CentralCloud; CVE-2022-43870 also ranges over both RSUs.
  REQUIRE(steps.size() == 6);
  CHECK(steps[4].cve == "CVE-2022-43870");
  CHECK(steps[4].bindings.at("rsu") == "RSU-1");
  CHECK(steps[5].bindings.at("rsu") == "RSU-2");
  for (std::size_t i = 0; i < steps.size(); ++i) CHECK(steps[i].index == i);
}

TEST_CASE("S2 chain is the only way to signal control") {
  const auto t = fixture("scenario2");
  const auto c = catalog();
  const auto paths = enumerate_attack_paths(t, c, "ATTACKER", AttackGoal::parse("signal-control"));
  CHECK(chains(paths) == std::vector<std::string>{"CVE-2019-5432 → CVE-2021-22118 → CVE-2022-43870"});
  CHECK(paths[0].steps[2].bindings.at("rsu") == "RSU-1");
  CHECK(enumerate_attack_paths(t, c, "ATTACKER", AttackGoal::parse("signal-control"), 1).empty());
  CHECK(enumerate_attack_paths(t, c, "ATTACKER", AttackGoal::parse("signal-control"), 2).empty());
  // No IPv6 link from the attacker: no database write.
  CHECK(enumerate_attack_paths(t, c, "ATTACKER", AttackGoal::parse("db-write")).empty());
}

TEST_CASE("S1 chain reaches the database") {
  const auto t = fixture("scenario1");
  const auto c = catalog();
  CHECK(chains(enumerate_attack_paths(t, c, "ATTACKER", AttackGoal::parse("db-write:CENTRAL"))) ==
        std::vector<std::string>{"CVE-2020-27338 → CVE-2022-30927"});
  CHECK(chains(enumerate_attack_paths(t, c, "ATTACKER", AttackGoal::parse("effect:db-tamper"))) ==
        std::vector<std::string>{"CVE-2020-27338 → CVE-2022-30927"});
  CHECK(enumerate_attack_paths(t, c, "ATTACKER", AttackGoal::parse("signal-control")).empty());
}

TEST_CASE("no attacker, no paths") {
  const auto t = fixture("reference");
  CHECK(enumerate_attack_paths(t, catalog(), "ATTACKER", AttackGoal::parse("signal-control")).empty());
  CHECK(enumerate_attack_paths(t, VulnCatalog{}, "ATTACKER", AttackGoal::parse("signal-control")).empty());
}

TEST_CASE("shipped fixtures agree with the brute-force oracle") {
  const auto c = catalog();
  for (const auto* name : {"scenario1", "scenario2", "reference"}) {
    const auto t = fixture(name);
    for (const auto* goal : {"signal-control", "db-write", "effect:register-rogue-emergency", "network-adjacent"}) {
      for (int depth = 1; depth <= 3; ++depth) {
        const auto g = AttackGoal::parse(goal);
        std::vector<oracle::PathKey> got;
        for (const auto& p : enumerate_attack_paths(t, c, "ATTACKER", g, depth)) got.push_back(oracle::key_of(p));
        CHECK(got == oracle::attack_paths(t, c, "ATTACKER", g, depth));
      }
    }
  }
}

TEST_CASE("random instances agree with the brute-force oracle") {
  std::mt19937_64 rng(99);
  int nonempty = 0;
  for (int i = 0; i < 200; ++i) {
    const auto inst = oracle::random_instance(rng);
    const auto got = enumerate_attack_paths(inst.topology, inst.catalog, inst.attacker, inst.goal, inst.depth);
    std::vector<oracle::PathKey> keys;
    for (const auto& p : got) keys.push_back(oracle::key_of(p));
    const auto want = oracle::attack_paths(inst.topology, inst.catalog, inst.attacker, inst.goal, inst.depth);
    INFO("instance " << i << " goal " << inst.goal.str());
    REQUIRE(keys == want);
    nonempty += !want.empty();
  }
  // The generator must exercise non-trivial answers too.
  CHECK(nonempty >= 20);
}
