#include <map>
#include <random>

#include "cits/errors.hpp"
#include "cits/monitor.hpp"
#include "cits/signal.hpp"
#include "doctest.h"

using namespace cits;

namespace {

// Phases p0..p(n-1), phase i serves approach "a<i>", all mutually conflicting.
SignalPlan plan(std::vector<int> dwell) {
  SignalPlan p;
  p.controller = "RSU-1";
  const auto n = dwell.size();
  for (std::size_t i = 0; i < n; ++i) {
    p.phases.push_back("p" + std::to_string(i));
    p.approaches.push_back("a" + std::to_string(i));
    p.serves.push_back({"a" + std::to_string(i)});
  }
  p.conflict.assign(n, std::vector<bool>(n, true));
  for (std::size_t i = 0; i < n; ++i) p.conflict[i][i] = false;
  p.dwell_ticks = std::move(dwell);
  return p;
}

CapabilitySet control_of(const NodeId& node) {
  CapabilitySet c;
  c.grant({CapabilityKind::SignalControl, node});
  return c;
}

}  // namespace

TEST_CASE("fixed cycle advances after dwell ticks") {
  SignalController c("X", plan({3, 3}));
  CHECK(c.active() == std::vector<std::size_t>{0});
  CHECK(c.step(100).active == std::vector<std::size_t>{0});
  CHECK(c.step(200).active == std::vector<std::size_t>{0});
  const auto third = c.step(300);
  CHECK(third.active == std::vector<std::size_t>{1});
  CHECK(third.transitioned);
  CHECK(third.tick == 3);
  for (int i = 0; i < 3; ++i) c.step(0);
  CHECK(c.current_phase() == 0);
}

TEST_CASE("pending preemption activates at the next tick") {
  SignalController c("X", plan({30, 30}));
  c.step(100);
  c.request_preemption(7, "a1");
  CHECK(c.pending_preemptions() == 1);
  const auto r = c.step(200);
  CHECK(r.active == std::vector<std::size_t>{1});
  CHECK(r.served == std::vector<std::uint64_t>{7});
  REQUIRE(r.arrivals.size() == 1);
  CHECK(r.arrivals[0].request_id == 7);
  CHECK(c.pending_preemptions() == 0);
  CHECK_THROWS_AS(c.request_preemption(8, "zz"), UnknownApproach);
}

TEST_CASE("request for the green approach is served at once") {
  SignalController c("X", plan({5, 5}));
  c.request_preemption(1, "a0");
  const auto r = c.step(0);
  CHECK(r.served == std::vector<std::uint64_t>{1});
  CHECK(r.active == std::vector<std::size_t>{0});
}

TEST_CASE("conflicting preemptions are served first come") {
  SignalController c("X", plan({3, 3, 3}));
  c.request_preemption(1, "a1");
  c.request_preemption(2, "a2");
  auto r = c.step(0);
  CHECK(r.served == std::vector<std::uint64_t>{1});
  CHECK(r.active == std::vector<std::size_t>{1});
  r = c.step(0);
  CHECK(r.served.empty());
  r = c.step(0);
  CHECK(r.served.empty());
  CHECK(r.active == std::vector<std::size_t>{1});
  r = c.step(0);
  CHECK(r.served == std::vector<std::uint64_t>{2});
  CHECK(r.active == std::vector<std::size_t>{2});
}

TEST_CASE("override needs SignalControl over the controller node") {
  SignalController c("X", plan({3, 3}));
  const SignalOverride dual{OverrideMode::DualGreen, {0, 1}, 2, "ATTACKER"};
  CHECK_FALSE(c.submit_override(dual, {}));
  CHECK_FALSE(c.submit_override(dual, control_of("RSU-2")));
  CHECK_FALSE(c.submit_override({OverrideMode::Hold, {5}, 2, "A"}, control_of("RSU-1")));
  CHECK_FALSE(c.submit_override({OverrideMode::Hold, {}, 2, "A"}, control_of("RSU-1")));
  CHECK_FALSE(c.override_active());

  REQUIRE(c.submit_override(dual, control_of("RSU-1")));
  std::vector<PhaseRecord> history;
  for (int i = 0; i < 5; ++i) history.push_back(c.step(i * 100));
  CHECK(history[0].active == std::vector<std::size_t>{0, 1});
  CHECK(history[0].override_active);
  CHECK(history[1].override_active);
  CHECK_FALSE(history[2].override_active);
  CHECK(history[2].active.size() == 1);

  const auto alarms = check_signal_safety("X", c.plan(), history, 2, {});
  REQUIRE(alarms.size() == 1);
  CHECK(alarms[0].kind == AlarmKind::ConflictingGreen);
  CHECK(alarms[0].subject == "X");
  CHECK(alarms[0].time == 0);
}

TEST_CASE("override holds back a pending preemption") {
  SignalController c("X", plan({3, 3}));
  REQUIRE(c.submit_override({OverrideMode::Hold, {0}, 4, "A"}, control_of("RSU-1")));
  c.request_preemption(9, "a1");
  for (int i = 0; i < 4; ++i) CHECK(c.step(0).served.empty());
  CHECK(c.step(0).served == std::vector<std::uint64_t>{9});
}

TEST_CASE("property: without overrides at most one phase is green and requests are served in time") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    std::vector<int> dwell;
    for (int i = 0; i < n; ++i) dwell.push_back(1 + static_cast<int>(rng() % 6));
    SignalController c("X", plan(dwell));
    const int bound = c.plan().max_dwell() + 2;
    std::map<std::uint64_t, std::int64_t> open;
    std::uint64_t next = 1;
    for (std::int64_t t = 1; t <= 300; ++t) {
      if (c.pending_preemptions() == 0 && rng() % 10 == 0) {
        open[next] = t;
        c.request_preemption(next++, "a" + std::to_string(rng() % n));
      }
      const auto r = c.step(t);
      REQUIRE(r.active.size() == 1);
      for (auto id : r.served) open.erase(id);
      for (const auto& [id, at] : open) REQUIRE(t - at < bound);
    }
  }
}
