#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cits/capability.hpp"
#include "cits/topology.hpp"

namespace cits {

struct Ack {
  bool accepted = true;
  std::string note;
};

struct ParkingAvailability {
  int available = 0;
  double price = 0.0;
};

struct EmergencyRegistration {
  NodeId device;
  std::string credential;
  NodeId issued_by;
  /// Ground truth only; service logic never branches on it.
  bool legitimate = false;
};

struct VehicleStatus {
  NodeId vehicle;
  std::string position;
  double speed = 0.0;
  Millis last_update = 0;

  friend bool operator==(const VehicleStatus&, const VehicleStatus&) = default;
};

struct CentralDb {
  std::map<std::string, ParkingLot> parking;
  /// Segment id -> penalty added to the segment's base cost.
  std::map<std::string, double> incidents;
  std::vector<EmergencyRegistration> registrations;
  std::map<NodeId, VehicleStatus> statuses;
};

struct Route {
  bool reachable = false;
  std::vector<std::string> path;
  double cost = 0.0;
};

/// Minimum-cost route with effective cost = base cost + incident penalty.
/// Ties go to the lexicographically smaller intersection sequence. Throws
/// UnknownIntersection.
Route compute_route(const RoadGraph& graph, const std::map<std::string, double>& incidents,
                    const std::string& from, const std::string& to);

/// Cost of a given path under `incidents`; nullopt if a hop has no segment.
std::optional<double> path_cost(const RoadGraph& graph,
                                const std::map<std::string, double>& incidents,
                                const std::vector<std::string>& path);

/// Where a preemption command must go.
struct PreemptionDecision {
  NodeId controller;
  std::string intersection;
  std::string approach;
  std::size_t phase = 0;
};

/// Round-robin dispatch across the Mobile Cloud instances of each service.
class MobileCloud {
 public:
  MobileCloud() = default;
  explicit MobileCloud(std::map<std::string, int> instances) : instances_(std::move(instances)) {}

  /// Throws NoInstance.
  std::size_t dispatch(const std::string& service);
  int instances(const std::string& service) const;
  std::uint64_t handled(const std::string& service, std::size_t instance) const;

 private:
  std::map<std::string, int> instances_;
  std::map<std::string, std::uint64_t> next_;
  std::map<std::pair<std::string, std::size_t>, std::uint64_t> handled_;
};

/// Service state of the Central Cloud: the served database, its shadow
/// ground truth and the Mobile Cloud dispatcher.
///
/// Legitimate operations update both copies. Writes made only through an
/// attacker capability, and direct tampering, touch the served copy alone.
class Services {
 public:
  explicit Services(const Topology& topology);

  const NodeId& database_node() const { return db_node_; }
  const CentralDb& stored() const { return stored_; }
  const CentralDb& ground_truth() const { return truth_; }
  MobileCloud& mobile_cloud() { return mobile_cloud_; }
  const MobileCloud& mobile_cloud() const { return mobile_cloud_; }

  // PM01 parking space management. Throws UnknownLot, OccupancyOutOfRange.
  Ack pm01_ingest_occupancy(const NodeId& provider, const std::string& lot, int occupied,
                            const CapabilitySet& provider_caps = {});
  ParkingAvailability pm01_query(const NodeId& requester, const std::string& lot) const;

  // PS03 emergency vehicle preemption. Throws InvalidProof.
  EmergencyRegistration ps03_register_emergency(const NodeId& device, const std::string& proof,
                                                const CapabilitySet& device_caps = {});
  /// Throws UnregisteredDevice, UnknownIntersection, UnknownApproach.
  PreemptionDecision ps03_request_preemption(const EmergencyRegistration& reg,
                                             const std::string& intersection,
                                             const std::string& approach) const;
  const EmergencyRegistration* find_registration(const NodeId& device) const;

  // SU01 connected vehicle monitoring. Throws UnknownVehicle.
  Ack su01_ingest_status(const NodeId& source, VehicleStatus status);
  /// Vehicles whose last update is older than `staleness_ms` at `now` and
  /// that were not already flagged.
  std::vector<NodeId> su01_sweep(Millis now, Millis staleness_ms);
  const std::set<NodeId>& stale_vehicles() const { return stale_; }

  // TI03 dynamic route guidance, computed on the served incident table.
  Route ti03_compute_route(const std::string& from, const std::string& to) const;
  /// Throws UnknownSegment, NegativePenalty.
  Ack ti03_ingest_incident(const NodeId& provider, const std::string& segment, double penalty,
                           const CapabilitySet& provider_caps = {});

  std::size_t mobile_cloud_dispatch(const std::string& service) {
    return mobile_cloud_.dispatch(service);
  }

  // Direct writes to the served copy, used by attack effects. Unknown tables
  // or keys throw Error.
  void tamper_parking(const std::string& lot, int occupied);
  void tamper_incident(const std::string& segment, double penalty);

 private:
  bool has_db_write(const CapabilitySet& caps) const;

  const Topology* topology_;
  NodeId db_node_;
  CentralDb stored_;
  CentralDb truth_;
  MobileCloud mobile_cloud_;
  std::set<NodeId> stale_;
  std::uint64_t next_credential_ = 1;
};

}  // namespace cits
