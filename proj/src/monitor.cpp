#include "cits/monitor.hpp"

#include <algorithm>
#include <sstream>

namespace cits {

std::string_view to_string(AlarmKind kind) {
  switch (kind) {
    case AlarmKind::IntegrityViolation: return "IntegrityViolation";
    case AlarmKind::ConflictingGreen: return "ConflictingGreen";
    case AlarmKind::PreemptionDenial: return "PreemptionDenial";
    case AlarmKind::RogueEmergency: return "RogueEmergency";
    case AlarmKind::RouteSuboptimal: return "RouteSuboptimal";
  }
  return "?";
}

const std::vector<AlarmKind>& all_alarm_kinds() {
  static const std::vector<AlarmKind> kinds{AlarmKind::IntegrityViolation, AlarmKind::ConflictingGreen,
                                            AlarmKind::PreemptionDenial, AlarmKind::RogueEmergency,
                                            AlarmKind::RouteSuboptimal};
  return kinds;
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

template <typename Map, typename Same, typename Show>
void diff_table(const std::string& table, const Map& stored, const Map& truth, Same same, Show show,
                std::vector<Alarm>& out) {
  std::set<std::string> keys;
  for (const auto& [k, v] : stored) keys.insert(k);
  for (const auto& [k, v] : truth) keys.insert(k);
  for (const auto& k : keys) {
    const auto s = stored.find(k);
    const auto t = truth.find(k);
    const bool in_s = s != stored.end();
    const bool in_t = t != truth.end();
    if (in_s && in_t && same(s->second, t->second)) continue;
    Alarm a;
    a.kind = AlarmKind::IntegrityViolation;
    a.subject = table + "/" + k;
    a.details = "stored " + (in_s ? show(s->second) : std::string("absent")) + ", truth " +
                (in_t ? show(t->second) : std::string("absent"));
    out.push_back(std::move(a));
  }
}

}  // namespace

std::vector<Alarm> check_db_integrity(const CentralDb& stored, const CentralDb& ground_truth) {
  std::vector<Alarm> out;
  diff_table(
      "parking", stored.parking, ground_truth.parking,
      [](const ParkingLot& a, const ParkingLot& b) {
        return a.capacity == b.capacity && a.occupied == b.occupied && a.price == b.price;
      },
      [](const ParkingLot& l) { return "occupied=" + std::to_string(l.occupied); }, out);
  diff_table(
      "incidents", stored.incidents, ground_truth.incidents, [](double a, double b) { return a == b; },
      [](double p) { return "penalty=" + num(p); }, out);
  diff_table(
      "statuses", stored.statuses, ground_truth.statuses,
      [](const VehicleStatus& a, const VehicleStatus& b) { return a == b; },
      [](const VehicleStatus& s) { return "position=" + s.position; }, out);
  return out;
}

std::vector<Alarm> check_emergency_auth(const std::vector<EmergencyRegistration>& registrations) {
  std::vector<Alarm> out;
  for (const auto& r : registrations) {
    if (r.legitimate) continue;
    Alarm a;
    a.kind = AlarmKind::RogueEmergency;
    a.subject = r.device;
    a.details = "registration " + r.credential + " issued without enrollment proof";
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Alarm> check_route_optimality(const std::vector<ServedRoute>& routes, const RoadGraph& graph,
                                          const std::map<std::string, double>& truth_incidents) {
  std::vector<Alarm> out;
  for (const auto& r : routes) {
    const auto best = compute_route(graph, truth_incidents, r.from, r.to);
    std::optional<double> served;
    if (!r.path.empty()) served = path_cost(graph, truth_incidents, r.path);
    bool bad = false;
    std::string details;
    if (!best.reachable) {
      bad = served.has_value();
      details = "served a path where none exists";
    } else if (!served) {
      bad = true;
      details = "served no valid path, optimum " + num(best.cost);
    } else if (*served > best.cost) {
      bad = true;
      details = "served cost " + num(*served) + ", optimum " + num(best.cost);
    }
    if (!bad) continue;
    Alarm a;
    a.time = r.time;
    a.kind = AlarmKind::RouteSuboptimal;
    a.subject = r.vehicle;
    a.details = r.from + "->" + r.to + ": " + details;
    out.push_back(std::move(a));
  }
  return out;
}

SignalSafetyMonitor::SignalSafetyMonitor(std::string intersection, SignalPlan plan, int latency_ticks)
    : intersection_(std::move(intersection)), plan_(std::move(plan)), latency_ticks_(latency_ticks) {}

std::vector<Alarm> SignalSafetyMonitor::observe(const PhaseRecord& record) {
  std::vector<Alarm> out;

  std::optional<std::pair<std::size_t, std::size_t>> clash;
  for (std::size_t i = 0; i < record.active.size() && !clash; ++i) {
    for (std::size_t j = i + 1; j < record.active.size(); ++j) {
      const auto p = record.active[i];
      const auto q = record.active[j];
      if (p < plan_.conflict.size() && q < plan_.conflict.size() && plan_.conflict[p][q]) {
        clash = {p, q};
        break;
      }
    }
  }
  if (clash && !in_conflict_) {
    Alarm a;
    a.time = record.time;
    a.kind = AlarmKind::ConflictingGreen;
    a.subject = intersection_;
    a.details = "phases " + plan_.phases[clash->first] + " and " + plan_.phases[clash->second] +
                " green at tick " + std::to_string(record.tick);
    out.push_back(std::move(a));
  }
  in_conflict_ = clash.has_value();

  for (const auto& arrival : record.arrivals) {
    const auto ahead = static_cast<std::int64_t>(waiting_.size());
    waiting_.push_back({arrival.request_id, arrival.approach,
                        record.tick + latency_ticks_ + plan_.max_dwell() * (1 + ahead),
                        legit_.count(arrival.request_id) > 0});
  }
  for (auto id : record.served) {
    std::erase_if(waiting_, [&](const Waiting& w) { return w.request_id == id; });
  }
  for (auto it = waiting_.begin(); it != waiting_.end();) {
    if (record.tick < it->deadline) {
      ++it;
      continue;
    }
    if (it->legitimate) {
      Alarm a;
      a.time = record.time;
      a.kind = AlarmKind::PreemptionDenial;
      a.subject = intersection_;
      a.details = "request " + std::to_string(it->request_id) + " for approach " + it->approach +
                  " unserved at tick " + std::to_string(record.tick);
      out.push_back(std::move(a));
    }
    it = waiting_.erase(it);
  }
  return out;
}

std::vector<Alarm> check_signal_safety(const std::string& intersection, const SignalPlan& plan,
                                       const std::vector<PhaseRecord>& history, int latency_ticks,
                                       const std::set<std::uint64_t>& legitimate_requests) {
  SignalSafetyMonitor m(intersection, plan, latency_ticks);
  for (auto id : legitimate_requests) m.mark_legitimate(id);
  std::vector<Alarm> out;
  for (const auto& rec : history) {
    auto found = m.observe(rec);
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

Monitor::Monitor(const Topology& topology, int latency_ticks) : topology_(&topology) {
  for (const auto& [id, plan] : topology.road_graph.signals) {
    signals_.emplace(id, SignalSafetyMonitor(id, plan, latency_ticks));
  }
}

void Monitor::mark_legitimate_preemption(const std::string& intersection, std::uint64_t request_id) {
  const auto it = signals_.find(intersection);
  if (it != signals_.end()) it->second.mark_legitimate(request_id);
}

std::vector<Alarm> Monitor::tick(Millis now, const Services& services,
                                 const std::map<std::string, PhaseRecord>& phases) {
  std::vector<Alarm> out;

  std::set<std::string> divergent;
  for (auto& a : check_db_integrity(services.stored(), services.ground_truth())) {
    divergent.insert(a.subject);
    if (divergent_.count(a.subject)) continue;
    a.time = now;
    out.push_back(std::move(a));
  }
  divergent_ = std::move(divergent);

  const auto& regs = services.stored().registrations;
  const std::vector<EmergencyRegistration> fresh(regs.begin() + static_cast<std::ptrdiff_t>(registrations_seen_),
                                                 regs.end());
  registrations_seen_ = regs.size();
  for (auto& a : check_emergency_auth(fresh)) {
    a.time = now;
    out.push_back(std::move(a));
  }

  for (const auto& r : routes_) {
    const auto key = r.vehicle + "|" + r.from + "|" + r.to;
    auto found = check_route_optimality({r}, topology_->road_graph, services.ground_truth().incidents);
    if (found.empty()) {
      suboptimal_.erase(key);
    } else if (suboptimal_.insert(key).second) {
      found.front().time = now;
      out.push_back(std::move(found.front()));
    }
  }
  routes_.clear();

  for (const auto& [id, rec] : phases) {
    const auto it = signals_.find(id);
    if (it == signals_.end()) continue;
    for (auto& a : it->second.observe(rec)) out.push_back(std::move(a));
  }
  return out;
}

}  // namespace cits
