#include "cits/services.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "cits/errors.hpp"

namespace cits {

namespace {

const std::vector<std::string> kAppServices{"pm01", "ps03", "su01", "ti03"};

double penalty_of(const std::map<std::string, double>& incidents, const std::string& segment) {
  const auto it = incidents.find(segment);
  return it == incidents.end() ? 0.0 : it->second;
}

}  // namespace

Route compute_route(const RoadGraph& graph, const std::map<std::string, double>& incidents,
                    const std::string& from, const std::string& to) {
  if (!graph.has_intersection(from)) throw UnknownIntersection("unknown intersection '" + from + "'");
  if (!graph.has_intersection(to)) throw UnknownIntersection("unknown intersection '" + to + "'");

  std::map<std::string, std::vector<const Segment*>> out_edges;
  for (const auto& s : graph.segments) out_edges[s.from].push_back(&s);

  // Labels are (cost, path); with positive costs the first label settled for
  // a node is its (min cost, lexicographically smallest path).
  using Label = std::pair<double, std::vector<std::string>>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> queue;
  std::set<std::string> settled;
  queue.push({0.0, {from}});
  while (!queue.empty()) {
    Label label = queue.top();
    queue.pop();
    const std::string node = label.second.back();
    if (!settled.insert(node).second) continue;
    if (node == to) return Route{true, std::move(label.second), label.first};
    for (const Segment* s : out_edges[node]) {
      if (settled.count(s->to)) continue;
      auto path = label.second;
      path.push_back(s->to);
      queue.push({label.first + s->cost + penalty_of(incidents, s->id()), std::move(path)});
    }
  }
  return Route{};
}

std::optional<double> path_cost(const RoadGraph& graph, const std::map<std::string, double>& incidents,
                                const std::vector<std::string>& path) {
  double cost = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto* seg = graph.find_segment(path[i - 1] + "->" + path[i]);
    if (!seg) return std::nullopt;
    cost += seg->cost + penalty_of(incidents, seg->id());
  }
  return cost;
}

std::size_t MobileCloud::dispatch(const std::string& service) {
  const int n = instances(service);
  if (n <= 0) throw NoInstance("service '" + service + "' has no Mobile Cloud instance");
  auto& counter = next_[service];
  const auto index = static_cast<std::size_t>(counter % static_cast<std::uint64_t>(n));
  ++counter;
  ++handled_[{service, index}];
  return index;
}

int MobileCloud::instances(const std::string& service) const {
  const auto it = instances_.find(service);
  return it == instances_.end() ? 0 : it->second;
}

std::uint64_t MobileCloud::handled(const std::string& service, std::size_t instance) const {
  const auto it = handled_.find({service, instance});
  return it == handled_.end() ? 0 : it->second;
}

Services::Services(const Topology& topology) : topology_(&topology) {
  const Node* db = nullptr;
  for (const auto& n : topology.nodes) {
    if (n.kind == NodeKind::CentralCloud && n.hosts("database") && (!db || n.id < db->id)) db = &n;
  }
  if (!db) db = topology.first_of_kind(NodeKind::CentralCloud);
  if (db) db_node_ = db->id;

  for (const auto& lot : topology.parking_lots) stored_.parking.emplace(lot.id, lot);
  truth_ = stored_;

  std::map<std::string, int> instances;
  for (const auto& svc : kAppServices) {
    if (const auto* host = topology.host_of(svc)) {
      const auto it = host->instances.find(svc);
      instances[svc] = it == host->instances.end() ? 1 : it->second;
    }
  }
  mobile_cloud_ = MobileCloud(std::move(instances));
}

bool Services::has_db_write(const CapabilitySet& caps) const {
  return !db_node_.empty() && caps.has(CapabilityKind::DbWrite, db_node_);
}

Ack Services::pm01_ingest_occupancy(const NodeId& provider, const std::string& lot, int occupied,
                                    const CapabilitySet& provider_caps) {
  const auto it = stored_.parking.find(lot);
  if (it == stored_.parking.end()) throw UnknownLot("unknown parking lot '" + lot + "'");
  if (occupied < 0 || occupied > it->second.capacity) {
    throw OccupancyOutOfRange("occupancy " + std::to_string(occupied) + " outside [0, " +
                              std::to_string(it->second.capacity) + "] for lot '" + lot + "'");
  }
  const auto* node = topology_->find_node(provider);
  const bool legit = node && node->kind == NodeKind::ExternalProvider;
  if (!legit && !has_db_write(provider_caps)) {
    return Ack{false, "denied: '" + provider + "' is not a data provider"};
  }
  it->second.occupied = occupied;
  if (legit) truth_.parking.at(lot).occupied = occupied;
  return Ack{true, "lot " + lot + " occupied=" + std::to_string(occupied)};
}

ParkingAvailability Services::pm01_query(const NodeId& /*requester*/, const std::string& lot) const {
  const auto it = stored_.parking.find(lot);
  if (it == stored_.parking.end()) throw UnknownLot("unknown parking lot '" + lot + "'");
  return {it->second.capacity - it->second.occupied, it->second.price};
}

EmergencyRegistration Services::ps03_register_emergency(const NodeId& device, const std::string& proof,
                                                        const CapabilitySet& device_caps) {
  const bool enrolled = std::any_of(
      topology_->emergency_enrolled.begin(), topology_->emergency_enrolled.end(),
      [&](const EmergencyEnrollment& e) { return e.device == device && e.proof == proof; });
  const bool bypass = device_caps.has(CapabilityKind::EmergencyRegistered, device);
  if (!enrolled && !bypass) {
    throw InvalidProof("device '" + device + "' presented no valid enrollment proof");
  }
  EmergencyRegistration reg;
  reg.device = device;
  reg.credential = "cred-" + std::to_string(next_credential_++);
  reg.issued_by = db_node_;
  reg.legitimate = enrolled;
  stored_.registrations.push_back(reg);
  if (enrolled) truth_.registrations.push_back(reg);
  return reg;
}

const EmergencyRegistration* Services::find_registration(const NodeId& device) const {
  for (auto it = stored_.registrations.rbegin(); it != stored_.registrations.rend(); ++it) {
    if (it->device == device) return &*it;
  }
  return nullptr;
}

PreemptionDecision Services::ps03_request_preemption(const EmergencyRegistration& reg,
                                                     const std::string& intersection,
                                                     const std::string& approach) const {
  const bool known = std::any_of(stored_.registrations.begin(), stored_.registrations.end(),
                                 [&](const EmergencyRegistration& r) {
                                   return r.device == reg.device && r.credential == reg.credential;
                                 });
  if (!known) throw UnregisteredDevice("device '" + reg.device + "' is not registered");
  const auto it = topology_->road_graph.signals.find(intersection);
  if (it == topology_->road_graph.signals.end()) {
    throw UnknownIntersection("intersection '" + intersection + "' has no signal");
  }
  const auto phase = it->second.phase_serving(approach);
  if (!phase) {
    throw UnknownApproach("approach '" + approach + "' not served at '" + intersection + "'");
  }
  return PreemptionDecision{it->second.controller, intersection, approach, *phase};
}

Ack Services::su01_ingest_status(const NodeId& source, VehicleStatus status) {
  const auto* src = topology_->find_node(source);
  if (!src || (src->kind != NodeKind::Vehicle && src->kind != NodeKind::RoadsideUnit &&
               src->kind != NodeKind::MobileDevice)) {
    return Ack{false, "denied: '" + source + "' may not report vehicle status"};
  }
  const auto* vehicle = topology_->find_node(status.vehicle);
  if (!vehicle || vehicle->kind != NodeKind::Vehicle) {
    throw UnknownVehicle("unknown vehicle '" + status.vehicle + "'");
  }
  stale_.erase(status.vehicle);
  stored_.statuses[status.vehicle] = status;
  truth_.statuses[status.vehicle] = status;
  return Ack{true, status.vehicle + " at " + status.position};
}

std::vector<NodeId> Services::su01_sweep(Millis now, Millis staleness_ms) {
  std::vector<NodeId> newly;
  for (const auto& [vehicle, status] : stored_.statuses) {
    if (now - status.last_update > staleness_ms && stale_.insert(vehicle).second) {
      newly.push_back(vehicle);
    }
  }
  return newly;
}

Route Services::ti03_compute_route(const std::string& from, const std::string& to) const {
  return compute_route(topology_->road_graph, stored_.incidents, from, to);
}

Ack Services::ti03_ingest_incident(const NodeId& provider, const std::string& segment, double penalty,
                                   const CapabilitySet& provider_caps) {
  if (!topology_->road_graph.find_segment(segment)) {
    throw UnknownSegment("unknown segment '" + segment + "'");
  }
  if (penalty < 0.0) throw NegativePenalty("negative penalty for segment '" + segment + "'");
  const auto* node = topology_->find_node(provider);
  const bool legit =
      node && (node->kind == NodeKind::ExternalProvider || node->kind == NodeKind::RsuCloud);
  if (!legit && !has_db_write(provider_caps)) {
    return Ack{false, "denied: '" + provider + "' is not an incident source"};
  }
  stored_.incidents[segment] = penalty;
  if (legit) truth_.incidents[segment] = penalty;
  return Ack{true, "incident " + segment};
}

void Services::tamper_parking(const std::string& lot, int occupied) {
  const auto it = stored_.parking.find(lot);
  if (it == stored_.parking.end()) throw UnknownLot("unknown parking lot '" + lot + "'");
  it->second.occupied = occupied;
}

void Services::tamper_incident(const std::string& segment, double penalty) {
  if (!topology_->road_graph.find_segment(segment)) {
    throw UnknownSegment("unknown segment '" + segment + "'");
  }
  stored_.incidents[segment] = penalty;
}

}  // namespace cits
