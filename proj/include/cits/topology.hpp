#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cits/version.hpp"

namespace cits {

using NodeId = std::string;
using Millis = std::int64_t;

enum class NodeKind {
  Vehicle,
  RoadsideUnit,
  RsuCloud,
  CentralCloud,
  MobileDevice,
  ExternalProvider,
  AttackerDevice,
};

/// Wire codes are the enumerator values.
enum class ProtocolKind : std::uint8_t {
  Mqtt = 1,
  ItsG5 = 2,
  InternetIpv6 = 3,
  Snmpv3 = 4,
};

std::string_view to_string(NodeKind kind);
std::string_view to_string(ProtocolKind protocol);
std::optional<NodeKind> node_kind_from_string(std::string_view text);
std::optional<ProtocolKind> protocol_from_string(std::string_view text);

/// Service identifiers a node may host.
inline const std::set<std::string>& known_services() {
  static const std::set<std::string> services{
      "pm01", "ps03", "su01", "ti03", "signal-controller", "database"};
  return services;
}

struct SoftwareItem {
  std::string name;
  Version version;
};

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::Vehicle;
  std::vector<SoftwareItem> software;
  std::vector<std::string> services;
  /// Mobile Cloud instance count per hosted service; absent means 1.
  std::map<std::string, int> instances;

  bool hosts(std::string_view service) const;
};

struct Link {
  NodeId a;
  NodeId b;
  ProtocolKind protocol = ProtocolKind::Mqtt;
  Millis latency_ms = 1;

  bool touches(const NodeId& n) const { return a == n || b == n; }
  const NodeId& other(const NodeId& n) const { return a == n ? b : a; }
};

/// Directed road segment; incidents are keyed by `id()`.
struct Segment {
  std::string from;
  std::string to;
  double cost = 1.0;

  std::string id() const { return from + "->" + to; }
};

/// Fixed-cycle signal plan for one intersection. Per-phase vectors are
/// aligned with `phases`.
struct SignalPlan {
  NodeId controller;
  std::vector<std::string> phases;
  std::vector<std::string> approaches;
  std::vector<std::set<std::string>> serves;
  std::vector<std::vector<bool>> conflict;
  std::vector<int> dwell_ticks;

  std::optional<std::size_t> phase_index(std::string_view phase) const;
  /// First phase in plan order serving the approach.
  std::optional<std::size_t> phase_serving(std::string_view approach) const;
  int max_dwell() const;
};

struct RoadGraph {
  std::vector<std::string> intersections;
  std::vector<Segment> segments;
  std::map<std::string, SignalPlan> signals;

  bool has_intersection(std::string_view id) const;
  const Segment* find_segment(std::string_view id) const;
};

struct ParkingLot {
  std::string id;
  int capacity = 1;
  int occupied = 0;
  double price = 0.0;
  NodeId provider;
};

struct EmergencyEnrollment {
  NodeId device;
  std::string proof;
};

// Background traffic driven by the simulation. None of it is required for a
// topology to be valid; an absent section simply produces no traffic.
struct RouteWorkload {
  NodeId vehicle;
  std::string from;
  std::string to;
  Millis start_ms = 0;
  Millis period_ms = 1000;
};

struct ParkingQueryWorkload {
  NodeId requester;
  std::string lot;
  Millis start_ms = 0;
  Millis period_ms = 1000;
};

struct OccupancyFeed {
  NodeId provider;
  std::string lot;
  Millis start_ms = 0;
  Millis period_ms = 1000;
  std::vector<int> values;
};

struct IncidentReport {
  NodeId provider;
  std::string segment;
  double penalty = 0.0;
  Millis at_ms = 0;
};

struct PreemptionWorkload {
  Millis at_ms = 0;
  std::string intersection;
  std::string approach;
};

struct EmergencyWorkload {
  NodeId device;
  Millis register_at_ms = 0;
  std::vector<PreemptionWorkload> preemptions;
};

struct Workload {
  Millis status_period_ms = 1000;
  Millis status_jitter_ms = 50;
  /// Nodes that emit SU01 status updates; empty means every Vehicle.
  std::vector<NodeId> status_sources;
  std::vector<RouteWorkload> routes;
  std::vector<ParkingQueryWorkload> parking_queries;
  std::vector<OccupancyFeed> occupancy_feeds;
  std::vector<IncidentReport> incidents;
  std::vector<EmergencyWorkload> emergency;
};

/// The C-ITS environment model. Plain value type: built by the loader,
/// validated once, then shared read-only by every run.
struct Topology {
  int schema = 1;
  std::string name;
  std::vector<Node> nodes;
  std::vector<Link> links;
  RoadGraph road_graph;
  std::vector<ParkingLot> parking_lots;
  std::vector<EmergencyEnrollment> emergency_enrolled;
  Workload workload;

  const Node* find_node(std::string_view id) const;
  /// Throws UnknownNode.
  const Node& node(std::string_view id) const;
  /// First node of the given kind in id order.
  const Node* first_of_kind(NodeKind kind) const;
  /// First node hosting `service` in id order.
  const Node* host_of(std::string_view service) const;
  const ParkingLot* find_lot(std::string_view id) const;
};

/// Returns true when `protocol` may connect nodes of kinds `x` and `y`.
bool protocol_legal(NodeKind x, NodeKind y, ProtocolKind protocol);

/// Every invariant breach, each naming the offending entity. Empty iff valid.
std::vector<std::string> validate_topology(const Topology& t);

/// Parse without semantic validation. Throws IoError when the file cannot
/// be read and ParseError on malformed JSON or schema mismatch.
Topology parse_topology_file(const std::filesystem::path& path);
Topology parse_topology_text(std::string_view json_text);

/// Parse and validate. Throws ValidationError listing the violations.
Topology load_topology(const std::filesystem::path& path);
Topology load_topology_text(std::string_view json_text);

/// Canonical JSON text (stable key order, two-space indent).
std::string serialize_topology(const Topology& t);

/// True iff a simple path from `from` to `to` exists whose final hop into
/// `to` uses `protocol`. Throws UnknownNode.
bool protocol_on_path(const Topology& t, std::string_view from,
                      std::string_view to, ProtocolKind protocol);

/// True iff the node carries `name` at a version inside `range`.
/// Throws UnknownNode.
bool software_matches(const Topology& t, std::string_view node,
                      std::string_view name, const VersionRange& range);

struct Neighbor {
  NodeId node;
  ProtocolKind protocol;
  Millis latency_ms;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Sorted by node id, then protocol. Throws UnknownNode.
std::vector<Neighbor> neighbors(const Topology& t, std::string_view node);

}  // namespace cits
