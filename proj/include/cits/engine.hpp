#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "cits/pdu.hpp"
#include "cits/routing.hpp"
#include "cits/topology.hpp"

namespace cits {

struct SimConfig {
  std::uint64_t seed = 42;
  Millis horizon_ms = 60000;
  /// Signal controller and monitor cadence.
  Millis tick_ms = 100;
  int preemption_latency_ticks = 2;
  Millis staleness_ms = 5000;
};

/// Throws Error when horizon_ms >= tick_ms >= 1 does not hold.
void check_config(const SimConfig& config);

using EventId = std::uint64_t;

/// One link hop of a frame.
struct FrameDelivery {
  Frame frame;
  NodeId from;
  NodeId to;
  DispatchPolicy policy;
};

struct TimerFired {
  NodeId node;
  std::string tag;
};

struct AttackStepDue {
  std::size_t step = 0;
};

using EventKind = std::variant<FrameDelivery, TimerFired, AttackStepDue>;

struct Event {
  Millis time = 0;
  std::uint64_t seq = 0;
  EventKind kind;
};

enum class Direction { Send, Recv, Internal };

std::string_view to_string(Direction d);

struct TraceRecord {
  Millis time = 0;
  NodeId node;
  Direction direction = Direction::Internal;
  /// Message type name for send/recv, a tag for internal records.
  std::string type;
  std::string summary;
  std::optional<std::size_t> alarm;
};

/// One JSON object per line, keys in fixed order: t, node, dir, type,
/// summary, alarm.
std::string to_jsonl(const TraceRecord& r);
std::string to_jsonl(const std::vector<TraceRecord>& records);

struct RunSummary {
  std::uint64_t events_processed = 0;
  Millis final_clock = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t frames_emitted = 0;
  std::uint64_t frames_delivered = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t frames_in_flight = 0;
  std::uint64_t duplicates_suppressed = 0;
};

class EventHandler {
 public:
  virtual ~EventHandler() = default;
  virtual void on_message(const NodeId& /*at*/, const Pdu& /*pdu*/) {}
  virtual void on_timer(const NodeId& /*node*/, const std::string& /*tag*/) {}
  virtual void on_attack_step(std::size_t /*step*/) {}
};

/// Deterministic discrete-event core. Single-threaded; the topology must
/// outlive the engine.
class Engine {
 public:
  Engine(const Topology& topology, SimConfig config);

  void set_handler(EventHandler* handler) { handler_ = handler; }
  /// Frames for which the filter returns true are dropped on arrival.
  void set_drop_filter(std::function<bool(const NodeId& at, const Pdu&)> filter) {
    drop_filter_ = std::move(filter);
  }

  Millis now() const { return now_; }
  const SimConfig& config() const { return config_; }
  const Topology& topology() const { return *topology_; }
  const RoutingTable& routing() const { return routing_; }
  const NodeIndexTable& ids() const { return ids_; }

  /// Throws PastTime when at < now().
  EventId schedule(Millis at, EventKind kind);

  /// Sends `pdu` end to end, hop by hop along the static route. Assigns the
  /// message sequence number and returns the ids of the first-hop frame
  /// deliveries. Throws NoRoute.
  std::vector<EventId> send(const NodeId& from, const NodeId& to, Pdu pdu,
                            const DispatchPolicy& policy = DispatchPolicy::all());

  /// Processes every event with time <= until, then sets the clock to
  /// `until`.
  RunSummary run(Millis until);

  /// Uniform integer in [0, max_inclusive] drawn from the run's generator.
  std::uint64_t jitter(std::uint64_t max_inclusive);

  /// Appends a trace record stamped with now(); returns its index.
  std::size_t trace(const NodeId& node, Direction dir, std::string type, std::string summary,
                    std::optional<std::size_t> alarm = std::nullopt);
  const std::vector<TraceRecord>& trace_records() const { return trace_; }

  RunSummary summary() const;

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
  };

  std::vector<EventId> forward(const NodeId& at, const Pdu& pdu, const DispatchPolicy& policy);
  void deliver(FrameDelivery& hop);

  const Topology* topology_;
  SimConfig config_;
  RoutingTable routing_;
  NodeIndexTable ids_;
  EventHandler* handler_ = nullptr;
  std::function<bool(const NodeId&, const Pdu&)> drop_filter_;

  Millis now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint32_t next_message_ = 1;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::mt19937_64 rng_;
  std::vector<TraceRecord> trace_;
  // (node, source, msg_type, sequence) already accepted at node.
  std::set<std::tuple<NodeId, NodeId, std::uint16_t, std::uint32_t>> seen_;
  RunSummary stats_;
  std::uint64_t frames_queued_ = 0;
};

}  // namespace cits
