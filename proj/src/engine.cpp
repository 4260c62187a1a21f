#include "cits/engine.hpp"

#include "cits/errors.hpp"
#include "cits/messages.hpp"
#include "json.hpp"

namespace cits {

void check_config(const SimConfig& c) {
  if (c.tick_ms < 1) throw Error("tick_ms must be >= 1");
  if (c.horizon_ms < c.tick_ms) throw Error("horizon_ms must be >= tick_ms");
  if (c.preemption_latency_ticks < 1) throw Error("preemption_latency_ticks must be >= 1");
  if (c.staleness_ms < 1) throw Error("staleness_ms must be >= 1");
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Send: return "send";
    case Direction::Recv: return "recv";
    case Direction::Internal: return "internal";
  }
  return "?";
}

std::string to_jsonl(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.time;
  j["node"] = r.node;
  j["dir"] = std::string(to_string(r.direction));
  j["type"] = r.type;
  j["summary"] = r.summary;
  j["alarm"] = r.alarm ? nlohmann::ordered_json(*r.alarm) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

std::string to_jsonl(const std::vector<TraceRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_jsonl(r);
    out += '\n';
  }
  return out;
}

Engine::Engine(const Topology& topology, SimConfig config)
    : topology_(&topology),
      config_(config),
      routing_(topology),
      ids_(NodeIndexTable::from_topology(topology)),
      rng_(config.seed) {
  check_config(config_);
}

EventId Engine::schedule(Millis at, EventKind kind) {
  if (at < now_) {
    throw PastTime("cannot schedule at " + std::to_string(at) + " ms, clock is " +
                   std::to_string(now_) + " ms");
  }
  const EventId id = next_seq_++;
  queue_.push(Event{at, id, std::move(kind)});
  return id;
}

std::vector<EventId> Engine::send(const NodeId& from, const NodeId& to, Pdu pdu,
                                  const DispatchPolicy& policy) {
  topology_->node(from);
  topology_->node(to);
  if (from == to) throw NoRoute("'" + from + "' cannot send to itself");
  if (!routing_.next_hop(from, to)) throw NoRoute("no route from '" + from + "' to '" + to + "'");
  pdu.source = from;
  pdu.dest = to;
  pdu.sequence = next_message_++;
  seen_.emplace(from, pdu.source, pdu.msg_type, pdu.sequence);
  auto ids = forward(from, pdu, policy);
  ++stats_.messages_sent;
  trace(from, Direction::Send, std::string(msg::name(pdu.msg_type)), "to=" + to);
  return ids;
}

std::vector<EventId> Engine::forward(const NodeId& at, const Pdu& pdu, const DispatchPolicy& policy) {
  const auto next = routing_.next_hop(at, pdu.dest);
  if (!next) throw NoRoute("no route from '" + at + "' to '" + pdu.dest + "'");
  std::set<ProtocolKind> available;
  std::map<ProtocolKind, Millis> latency;
  for (const auto& l : topology_->links) {
    if (l.touches(at) && l.other(at) == *next && l.a != l.b) {
      available.insert(l.protocol);
      latency[l.protocol] = l.latency_ms;
    }
  }
  // A preference list naming none of the hop's interfaces falls back to the
  // lowest wire code rather than stranding the message mid-route.
  DispatchPolicy hop_policy = policy;
  if (policy.mode == DispatchPolicy::Mode::Preferred) {
    bool any = false;
    for (auto p : policy.order) any = any || available.count(p);
    if (!any) hop_policy = DispatchPolicy::preferred({*available.begin()});
  }
  std::vector<EventId> ids;
  for (auto& frame : hybrid_multiplex(pdu, available, hop_policy, ids_)) {
    const Millis at_ms = now_ + latency.at(frame.interface);
    ++stats_.frames_emitted;
    ++frames_queued_;
    ids.push_back(schedule(at_ms, FrameDelivery{std::move(frame), at, *next, policy}));
  }
  return ids;
}

void Engine::deliver(FrameDelivery& hop) {
  --frames_queued_;
  ++stats_.frames_delivered;
  const Pdu pdu = decode_pdu(hop.frame, ids_);
  if (drop_filter_ && drop_filter_(hop.to, pdu)) {
    --stats_.frames_delivered;
    ++stats_.frames_dropped;
    trace(hop.to, Direction::Internal, "drop", std::string(msg::name(pdu.msg_type)) + " from=" + pdu.source);
    return;
  }
  if (!seen_.emplace(hop.to, pdu.source, pdu.msg_type, pdu.sequence).second) {
    ++stats_.duplicates_suppressed;
    return;
  }
  if (pdu.dest != hop.to) {
    forward(hop.to, pdu, hop.policy);
    return;
  }
  ++stats_.messages_delivered;
  trace(hop.to, Direction::Recv, std::string(msg::name(pdu.msg_type)), "from=" + pdu.source);
  if (handler_) handler_->on_message(hop.to, pdu);
}

RunSummary Engine::run(Millis until) {
  while (!queue_.empty() && queue_.top().time <= until) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    ++stats_.events_processed;
    std::visit(
        [this](auto& kind) {
          using T = std::decay_t<decltype(kind)>;
          if constexpr (std::is_same_v<T, FrameDelivery>) {
            deliver(kind);
          } else if constexpr (std::is_same_v<T, TimerFired>) {
            if (handler_) handler_->on_timer(kind.node, kind.tag);
          } else {
            if (handler_) handler_->on_attack_step(kind.step);
          }
        },
        ev.kind);
  }
  if (until > now_) now_ = until;
  return summary();
}

RunSummary Engine::summary() const {
  RunSummary s = stats_;
  s.final_clock = now_;
  s.frames_in_flight = frames_queued_;
  return s;
}

std::uint64_t Engine::jitter(std::uint64_t max_inclusive) {
  const std::uint64_t draw = rng_();
  if (max_inclusive == std::numeric_limits<std::uint64_t>::max()) return draw;
  return draw % (max_inclusive + 1);
}

std::size_t Engine::trace(const NodeId& node, Direction dir, std::string type, std::string summary,
                          std::optional<std::size_t> alarm) {
  trace_.push_back(TraceRecord{now_, node, dir, std::move(type), std::move(summary), alarm});
  return trace_.size() - 1;
}

}  // namespace cits
