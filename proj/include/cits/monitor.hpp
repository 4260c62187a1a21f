#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cits/services.hpp"
#include "cits/signal.hpp"
#include "cits/topology.hpp"

namespace cits {

enum class AlarmKind { IntegrityViolation, ConflictingGreen, PreemptionDenial, RogueEmergency, RouteSuboptimal };

std::string_view to_string(AlarmKind kind);
const std::vector<AlarmKind>& all_alarm_kinds();

struct Alarm {
  Millis time = 0;
  AlarmKind kind = AlarmKind::IntegrityViolation;
  /// "parking/P1", "incidents/X2->X4", "X1", "AMB-1:3", a device id or a vehicle id.
  std::string subject;
  std::string details;
  /// Scenario step whose effect caused the alarm, when one is known.
  std::optional<std::size_t> cause_step;
  /// Trace record written for the alarm.
  std::optional<std::size_t> trace_index;
};

/// One IntegrityViolation per divergent record, keyed "table/id". Covers
/// parking, incidents and statuses; registrations are the emergency
/// checker's business.
std::vector<Alarm> check_db_integrity(const CentralDb& stored, const CentralDb& ground_truth);

/// One RogueEmergency per registration with legitimate=false.
std::vector<Alarm> check_emergency_auth(const std::vector<EmergencyRegistration>& registrations);

struct ServedRoute {
  Millis time = 0;
  NodeId vehicle;
  std::string from;
  std::string to;
  std::vector<std::string> path;
};

/// RouteSuboptimal when a served path, priced on ground-truth costs, is
/// dearer than the true optimum. Unreachable answers are checked against
/// reachability the same way.
std::vector<Alarm> check_route_optimality(const std::vector<ServedRoute>& routes, const RoadGraph& graph,
                                          const std::map<std::string, double>& truth_incidents);

/// ConflictingGreen at the first tick of every overlap episode, and
/// PreemptionDenial when a legitimate request is still unserved at
/// arrival tick + latency_ticks + max_dwell * (1 + requests queued ahead).
class SignalSafetyMonitor {
 public:
  SignalSafetyMonitor(std::string intersection, SignalPlan plan, int latency_ticks);

  void mark_legitimate(std::uint64_t request_id) { legit_.insert(request_id); }
  std::vector<Alarm> observe(const PhaseRecord& record);

 private:
  struct Waiting {
    std::uint64_t request_id;
    std::string approach;
    std::int64_t deadline;
    bool legitimate;
  };

  std::string intersection_;
  SignalPlan plan_;
  int latency_ticks_;
  std::set<std::uint64_t> legit_;
  std::vector<Waiting> waiting_;
  bool in_conflict_ = false;
};

std::vector<Alarm> check_signal_safety(const std::string& intersection, const SignalPlan& plan,
                                       const std::vector<PhaseRecord>& history, int latency_ticks,
                                       const std::set<std::uint64_t>& legitimate_requests);

/// Runs every checker at each tick and reports only new findings: a
/// database record or a (vehicle, from, to) route query raises once per
/// episode of wrongness, a registration once.
class Monitor {
 public:
  Monitor(const Topology& topology, int latency_ticks);

  void note_route(ServedRoute route) { routes_.push_back(std::move(route)); }
  void mark_legitimate_preemption(const std::string& intersection, std::uint64_t request_id);

  /// `phases` holds this tick's record for each intersection.
  std::vector<Alarm> tick(Millis now, const Services& services,
                          const std::map<std::string, PhaseRecord>& phases);

 private:
  const Topology* topology_;
  std::map<std::string, SignalSafetyMonitor> signals_;
  std::set<std::string> divergent_;
  std::size_t registrations_seen_ = 0;
  std::vector<ServedRoute> routes_;
  std::set<std::string> suboptimal_;
};

}  // namespace cits
