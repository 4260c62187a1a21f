#include "cits/simulation.hpp"

#include <algorithm>

#include "cits/errors.hpp"
#include "cits/json_util.hpp"
#include "cits/messages.hpp"

namespace cits {

namespace {

using Json = nlohmann::json;

std::vector<std::uint8_t> to_payload(const Json& j) {
  const auto text = j.dump();
  return {text.begin(), text.end()};
}

Json from_payload(const Pdu& pdu) {
  return Json::parse(pdu.payload.begin(), pdu.payload.end(), nullptr, false);
}

// Timer tags. Each carries the index of the workload entry it serves.
enum class TimerKind { Tick, Status, Route, Query, Feed, Incident, Register, Preempt };

struct TimerTag {
  TimerKind kind;
  std::size_t a = 0;
  std::size_t b = 0;
};

std::string encode_tag(const TimerTag& t) {
  static const char* names[] = {"tick", "status", "route", "query", "feed", "incident", "register", "preempt"};
  return std::string(names[static_cast<int>(t.kind)]) + ":" + std::to_string(t.a) + ":" + std::to_string(t.b);
}

TimerTag decode_tag(const std::string& tag) {
  static const std::vector<std::string> names{"tick", "status", "route", "query",
                                              "feed", "incident", "register", "preempt"};
  const auto c1 = tag.find(':');
  const auto c2 = tag.find(':', c1 + 1);
  const auto name = tag.substr(0, c1);
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end() || c1 == std::string::npos || c2 == std::string::npos) {
    throw Error("malformed timer tag '" + tag + "'");
  }
  return TimerTag{static_cast<TimerKind>(it - names.begin()), std::stoull(tag.substr(c1 + 1, c2 - c1 - 1)),
                  std::stoull(tag.substr(c2 + 1))};
}

class Simulation final : public EventHandler, public EffectSink {
 public:
  Simulation(const Topology& topology, const SimConfig& config, const VulnCatalog* catalog,
             const Scenario* scenario)
      : topology_(topology),
        engine_(topology, config),
        services_(topology),
        monitor_(topology, config.preemption_latency_ticks) {
    if (scenario) {
      if (!catalog) throw ScenarioError("scenario '" + scenario->id + "' given without a catalog");
      runner_.emplace(*catalog, *scenario, topology);
    }
    for (const auto& [id, plan] : topology.road_graph.signals) {
      controllers_.emplace(id, SignalController(id, plan));
    }
    engine_.set_handler(this);
  }

  SimulationResult run() {
    const auto& cfg = engine_.config();
    const auto& w = topology_.workload;
    const Millis horizon = cfg.horizon_ms;

    // Attack steps first so that a step and a workload event at the same
    // millisecond resolve in favour of the step.
    if (runner_) {
      const auto& steps = runner_->scenario().steps;
      for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].at_ms <= horizon) engine_.schedule(steps[i].at_ms, AttackStepDue{i});
      }
    }
    for (std::size_t i = 0; i < status_sources().size(); ++i) schedule_status(i, 0);
    for (std::size_t i = 0; i < w.routes.size(); ++i) timer(w.routes[i].start_ms, {TimerKind::Route, i, 0});
    for (std::size_t i = 0; i < w.parking_queries.size(); ++i) {
      timer(w.parking_queries[i].start_ms, {TimerKind::Query, i, 0});
    }
    for (std::size_t i = 0; i < w.occupancy_feeds.size(); ++i) {
      timer(w.occupancy_feeds[i].start_ms, {TimerKind::Feed, i, 0});
    }
    for (std::size_t i = 0; i < w.incidents.size(); ++i) timer(w.incidents[i].at_ms, {TimerKind::Incident, i, 0});
    for (std::size_t i = 0; i < w.emergency.size(); ++i) {
      timer(w.emergency[i].register_at_ms, {TimerKind::Register, i, 0});
      for (std::size_t j = 0; j < w.emergency[i].preemptions.size(); ++j) {
        timer(w.emergency[i].preemptions[j].at_ms, {TimerKind::Preempt, i, j});
      }
    }
    timer(cfg.tick_ms, {TimerKind::Tick, 0, 0});

    SimulationResult r;
    r.summary = engine_.run(horizon);
    r.config = cfg;
    if (runner_) {
      r.scenario = runner_->scenario();
      r.outcome = runner_->outcome();
    }
    r.trace = engine_.trace_records();
    r.alarms = std::move(alarms_);
    r.phase_history = std::move(history_);
    r.effects = std::move(effects_);
    r.served_routes = std::move(served_);
    r.stored = services_.stored();
    r.ground_truth = services_.ground_truth();
    return r;
  }

  // EventHandler

  void on_timer(const NodeId& /*node*/, const std::string& tag) override {
    const auto t = decode_tag(tag);
    const auto& w = topology_.workload;
    switch (t.kind) {
      case TimerKind::Tick:
        tick();
        break;
      case TimerKind::Status: {
        const auto& src = status_sources()[t.a];
        Json p{{"vehicle", src}, {"position", position_of(src)}, {"speed", 13.9}, {"t", engine_.now()}};
        send(src, services_.database_node(), msg::kStatusUpdate, p);
        schedule_status(t.a, t.b + 1);
        break;
      }
      case TimerKind::Route: {
        const auto& rw = w.routes[t.a];
        send(rw.vehicle, services_.database_node(), msg::kRouteRequest, Json{{"from", rw.from}, {"to", rw.to}});
        repeat(t, rw.start_ms, rw.period_ms);
        break;
      }
      case TimerKind::Query: {
        const auto& q = w.parking_queries[t.a];
        send(q.requester, services_.database_node(), msg::kParkingQuery, Json{{"lot", q.lot}});
        repeat(t, q.start_ms, q.period_ms);
        break;
      }
      case TimerKind::Feed: {
        const auto& f = w.occupancy_feeds[t.a];
        if (f.values.empty()) break;
        const int v = f.values[t.b % f.values.size()];
        send(f.provider, services_.database_node(), msg::kOccupancyUpdate, Json{{"lot", f.lot}, {"occupied", v}});
        repeat(t, f.start_ms, f.period_ms);
        break;
      }
      case TimerKind::Incident: {
        const auto& inc = w.incidents[t.a];
        send(inc.provider, services_.database_node(), msg::kIncidentReport,
             Json{{"segment", inc.segment}, {"penalty", inc.penalty}});
        break;
      }
      case TimerKind::Register: {
        const auto& e = w.emergency[t.a];
        std::string proof;
        for (const auto& en : topology_.emergency_enrolled) {
          if (en.device == e.device) proof = en.proof;
        }
        send(e.device, services_.database_node(), msg::kEmergencyRegister, Json{{"proof", proof}});
        break;
      }
      case TimerKind::Preempt: {
        const auto& e = w.emergency[t.a];
        const auto& pw = e.preemptions[t.b];
        send(e.device, services_.database_node(), msg::kPreemptionRequest,
             Json{{"intersection", pw.intersection}, {"approach", pw.approach}});
        break;
      }
    }
  }

  void on_attack_step(std::size_t step) override {
    const auto& s = runner_->scenario().steps[step];
    const auto& v = runner_->apply_step(step, engine_.now(), *this);
    std::string summary = runner_->scenario().id + "#" + std::to_string(step + 1) + " " + s.cve + " " +
                          std::string(to_string(v.status));
    if (!v.failing_atom.empty()) summary += " failing=" + v.failing_atom;
    engine_.trace(runner_->scenario().attacker, Direction::Internal, "attack.step", summary);
  }

  void on_message(const NodeId& at, const Pdu& pdu) override {
    const Json p = from_payload(pdu);
    if (p.is_discarded() || !p.is_object()) {
      engine_.trace(at, Direction::Internal, "reject", "malformed payload from=" + pdu.source);
      return;
    }
    try {
      handle(at, pdu, p);
    } catch (const Json::exception&) {
      engine_.trace(at, Direction::Internal, "reject", "malformed payload from=" + pdu.source);
    } catch (const NoRoute& e) {
      engine_.trace(at, Direction::Internal, "no_route", e.what());
    } catch (const Error& e) {
      engine_.trace(at, Direction::Internal, "reject", e.what());
    }
  }

  // EffectSink

  void db_tamper(std::size_t step, const DbMutation& m) override {
    if (m.table == "parking") {
      services_.tamper_parking(m.key, static_cast<int>(m.value));
    } else if (m.table == "incidents") {
      services_.tamper_incident(m.key, m.value);
    } else {
      throw ScenarioError("db_tamper: unknown table '" + m.table + "'");
    }
    const auto subject = m.table + "/" + m.key;
    taint_[subject] = step;
    effect(step, EffectKind::DbTamper, subject + "=" + json_number(m.value));
  }

  void register_rogue_emergency(std::size_t step, const NodeId& device) override {
    const auto reg = services_.ps03_register_emergency(device, "", runner_->capabilities());
    taint_["registrations/" + device] = step;
    effect(step, EffectKind::RegisterRogueEmergency, device + " " + reg.credential);
  }

  void inject_signal_command(std::size_t step, const SignalCommand& cmd, const NodeId& issuer) override {
    const auto it = topology_.road_graph.signals.find(cmd.intersection);
    if (it == topology_.road_graph.signals.end()) {
      throw ScenarioError("signal_command: intersection '" + cmd.intersection + "' has no signal");
    }
    for (const auto& ph : cmd.phases) {
      if (!it->second.phase_index(ph)) {
        throw ScenarioError("signal_command: unknown phase '" + ph + "' at '" + cmd.intersection + "'");
      }
    }
    effect(step, EffectKind::InjectSignalCommand,
           cmd.intersection + " " + std::string(to_string(cmd.mode)) + " for " +
               std::to_string(cmd.duration_ticks) + " ticks");
    // The command leaves from the compromised Mobile Cloud service toward
    // the RSU backend, like a legitimate signal-change command.
    Json p{{"kind", "override"},     {"intersection", cmd.intersection},
           {"mode", to_string(cmd.mode)}, {"phases", cmd.phases},
           {"duration_ticks", cmd.duration_ticks}, {"issuer", issuer},
           {"step", step}};
    try {
      send(services_.database_node(), it->second.controller, msg::kSignalControl, p,
           DispatchPolicy::preferred({ProtocolKind::Snmpv3}));
    } catch (const Error& e) {
      engine_.trace(issuer, Direction::Internal, "no_route", e.what());
    }
  }

 private:
  static std::string json_number(double v) { return Json(v).dump(); }

  void effect(std::size_t step, EffectKind kind, std::string detail) {
    const auto idx = engine_.trace(runner_->scenario().attacker, Direction::Internal, "attack.effect",
                                   std::string(to_string(kind)) + " " + detail);
    effects_.push_back({engine_.now(), step, kind, std::move(detail), idx});
  }

  const CapabilitySet& caps_of(const NodeId& node) const {
    static const CapabilitySet none;
    if (runner_ && node == runner_->scenario().attacker) return runner_->capabilities();
    return none;
  }

  const std::vector<NodeId>& status_sources() {
    if (!sources_) {
      sources_ = topology_.workload.status_sources;
      if (sources_->empty()) {
        for (const auto& n : topology_.nodes) {
          if (n.kind == NodeKind::Vehicle) sources_->push_back(n.id);
        }
        std::sort(sources_->begin(), sources_->end());
      }
    }
    return *sources_;
  }

  std::string position_of(const NodeId& vehicle) const {
    for (const auto& r : topology_.workload.routes) {
      if (r.vehicle == vehicle) return r.from;
    }
    return topology_.road_graph.intersections.empty() ? "" : topology_.road_graph.intersections.front();
  }

  void timer(Millis at, const TimerTag& tag) {
    if (at <= engine_.config().horizon_ms) engine_.schedule(at, TimerFired{"", encode_tag(tag)});
  }

  void repeat(const TimerTag& t, Millis start, Millis period) {
    if (period <= 0) return;
    timer(start + static_cast<Millis>(t.b + 1) * period, {t.kind, t.a, t.b + 1});
  }

  // Update k goes out at k * period + jitter; jitter never accumulates.
  void schedule_status(std::size_t source, std::size_t k) {
    const auto& w = topology_.workload;
    if (w.status_period_ms <= 0) return;
    const Millis base = static_cast<Millis>(k + 1) * w.status_period_ms;
    const Millis j = static_cast<Millis>(engine_.jitter(static_cast<std::uint64_t>(std::max<Millis>(0, w.status_jitter_ms))));
    timer(base + j, {TimerKind::Status, source, k});
  }

  void send(const NodeId& from, const NodeId& to, std::uint16_t type, const Json& payload,
            const DispatchPolicy& policy = DispatchPolicy::all()) {
    if (to.empty()) {
      engine_.trace(from, Direction::Internal, "no_route", std::string(msg::name(type)) + " has no server");
      return;
    }
    Pdu pdu;
    pdu.msg_type = type;
    pdu.payload = to_payload(payload);
    try {
      engine_.send(from, to, std::move(pdu), policy);
    } catch (const NoRoute& e) {
      engine_.trace(from, Direction::Internal, "no_route", e.what());
    }
  }

  void dispatch(const NodeId& at, const std::string& service) {
    const auto instance = services_.mobile_cloud_dispatch(service);
    engine_.trace(at, Direction::Internal, "dispatch", service + "#" + std::to_string(instance));
  }

  void handle(const NodeId& at, const Pdu& pdu, const Json& p) {
    const auto& src = pdu.source;
    switch (pdu.msg_type) {
      case msg::kStatusUpdate: {
        dispatch(at, "su01");
        VehicleStatus s{p.at("vehicle").get<std::string>(), p.at("position").get<std::string>(),
                        p.at("speed").get<double>(), p.at("t").get<Millis>()};
        note(at, services_.su01_ingest_status(src, s));
        break;
      }
      case msg::kOccupancyUpdate:
        dispatch(at, "pm01");
        note(at, services_.pm01_ingest_occupancy(src, p.at("lot").get<std::string>(), p.at("occupied").get<int>(),
                                                 caps_of(src)));
        break;
      case msg::kParkingQuery: {
        dispatch(at, "pm01");
        const auto lot = p.at("lot").get<std::string>();
        const auto a = services_.pm01_query(src, lot);
        send(at, src, msg::kParkingReply, Json{{"lot", lot}, {"available", a.available}, {"price", a.price}});
        break;
      }
      case msg::kIncidentReport:
        dispatch(at, "ti03");
        note(at, services_.ti03_ingest_incident(src, p.at("segment").get<std::string>(),
                                                p.at("penalty").get<double>(), caps_of(src)));
        break;
      case msg::kRouteRequest: {
        dispatch(at, "ti03");
        const auto from = p.at("from").get<std::string>();
        const auto to = p.at("to").get<std::string>();
        const auto route = services_.ti03_compute_route(from, to);
        ServedRoute served{engine_.now(), src, from, to, route.path};
        monitor_.note_route(served);
        served_.push_back(served);
        send(at, src, msg::kRouteReply, Json{{"path", route.path}, {"cost", route.cost}, {"reachable", route.reachable}});
        break;
      }
      case msg::kEmergencyRegister: {
        dispatch(at, "ps03");
        const auto reg = services_.ps03_register_emergency(src, p.at("proof").get<std::string>(), caps_of(src));
        send(at, src, msg::kEmergencyRegisterAck, Json{{"credential", reg.credential}});
        break;
      }
      case msg::kPreemptionRequest: {
        dispatch(at, "ps03");
        const auto* reg = services_.find_registration(src);
        if (!reg) throw UnregisteredDevice("device '" + src + "' is not registered");
        const auto d = services_.ps03_request_preemption(*reg, p.at("intersection").get<std::string>(),
                                                         p.at("approach").get<std::string>());
        const auto request = next_request_++;
        if (reg->legitimate) monitor_.mark_legitimate_preemption(d.intersection, request);
        send(at, d.controller, msg::kSignalControl,
             Json{{"kind", "preempt"}, {"intersection", d.intersection}, {"approach", d.approach}, {"request", request}},
             DispatchPolicy::preferred({ProtocolKind::Snmpv3}));
        break;
      }
      case msg::kSignalControl:
        handle_signal(at, p);
        break;
      default:
        break;
    }
  }

  void handle_signal(const NodeId& at, const Json& p) {
    const auto x = p.at("intersection").get<std::string>();
    const auto it = controllers_.find(x);
    if (it == controllers_.end() || it->second.plan().controller != at) {
      engine_.trace(at, Direction::Internal, "reject", "not the controller of " + x);
      return;
    }
    auto& ctl = it->second;
    if (p.at("kind") == "preempt") {
      ctl.request_preemption(p.at("request").get<std::uint64_t>(), p.at("approach").get<std::string>());
      engine_.trace(at, Direction::Internal, "signal.preempt", x + " approach=" + p.at("approach").get<std::string>());
      return;
    }
    SignalOverride cmd;
    cmd.mode = override_mode_from_string(p.at("mode").get<std::string>()).value_or(OverrideMode::DualGreen);
    for (const auto& name : p.at("phases")) cmd.phases.push_back(*ctl.plan().phase_index(name.get<std::string>()));
    cmd.duration_ticks = p.at("duration_ticks").get<int>();
    cmd.issuer = p.at("issuer").get<std::string>();
    const bool ok = ctl.submit_override(cmd, caps_of(cmd.issuer));
    if (ok && p.contains("step")) override_step_[x] = p.at("step").get<std::size_t>();
    engine_.trace(at, Direction::Internal, ok ? "signal.override" : "reject",
                  x + " " + std::string(to_string(cmd.mode)) + " issuer=" + cmd.issuer);
  }

  void note(const NodeId& at, const Ack& ack) {
    if (!ack.accepted) engine_.trace(at, Direction::Internal, "reject", ack.note);
  }

  void tick() {
    const Millis now = engine_.now();
    std::map<std::string, PhaseRecord> records;
    for (auto& [id, ctl] : controllers_) {
      auto rec = ctl.step(now);
      if (rec.transitioned) {
        std::string names;
        for (auto ph : rec.active) names += (names.empty() ? "" : "+") + ctl.plan().phases[ph];
        engine_.trace(ctl.plan().controller, Direction::Internal, "signal.phase", id + " " + names);
      }
      history_[id].push_back(rec);
      records.emplace(id, std::move(rec));
    }
    for (const auto& v : services_.su01_sweep(now, engine_.config().staleness_ms)) {
      engine_.trace(services_.database_node(), Direction::Internal, "su01.stale", v);
    }
    for (auto& a : monitor_.tick(now, services_, records)) raise(std::move(a));
    timer(now + engine_.config().tick_ms, {TimerKind::Tick, 0, 0});
  }

  std::optional<std::size_t> cause_of(const Alarm& a) const {
    const auto find = [&](const std::string& key) -> std::optional<std::size_t> {
      const auto it = taint_.find(key);
      if (it == taint_.end()) return std::nullopt;
      return it->second;
    };
    switch (a.kind) {
      case AlarmKind::IntegrityViolation:
        return find(a.subject);
      case AlarmKind::RogueEmergency:
        return find("registrations/" + a.subject);
      case AlarmKind::RouteSuboptimal: {
        // Latest step that left an incident record diverging from the truth.
        std::optional<std::size_t> best;
        for (const auto& [key, step] : taint_) {
          if (key.rfind("incidents/", 0) != 0) continue;
          const auto seg = key.substr(10);
          const auto& st = services_.stored().incidents;
          const auto& tr = services_.ground_truth().incidents;
          const auto s = st.find(seg);
          const auto t = tr.find(seg);
          const bool diverges = (s == st.end()) != (t == tr.end()) || (s != st.end() && s->second != t->second);
          if (diverges && (!best || step > *best)) best = step;
        }
        return best;
      }
      case AlarmKind::ConflictingGreen:
      case AlarmKind::PreemptionDenial: {
        const auto it = override_step_.find(a.subject);
        if (it == override_step_.end()) return std::nullopt;
        return it->second;
      }
    }
    return std::nullopt;
  }

  void raise(Alarm a) {
    a.cause_step = cause_of(a);
    NodeId node = services_.database_node();
    if (a.kind == AlarmKind::ConflictingGreen || a.kind == AlarmKind::PreemptionDenial) {
      node = topology_.road_graph.signals.at(a.subject).controller;
    }
    const auto index = alarms_.size();
    a.trace_index = engine_.trace(node, Direction::Internal, "alarm." + std::string(to_string(a.kind)),
                                  a.subject + ": " + a.details, index);
    alarms_.push_back(std::move(a));
  }

  const Topology& topology_;
  Engine engine_;
  Services services_;
  Monitor monitor_;
  std::optional<AttackRunner> runner_;
  std::map<std::string, SignalController> controllers_;
  std::optional<std::vector<NodeId>> sources_;
  std::uint64_t next_request_ = 1;

  std::map<std::string, std::size_t> taint_;
  std::map<std::string, std::size_t> override_step_;
  std::vector<Alarm> alarms_;
  std::map<std::string, std::vector<PhaseRecord>> history_;
  std::vector<AppliedEffect> effects_;
  std::vector<ServedRoute> served_;
};

}  // namespace

SimulationResult run_simulation(const Topology& topology, const SimConfig& config, const VulnCatalog* catalog,
                                const Scenario* scenario) {
  Simulation sim(topology, config, catalog, scenario);
  return sim.run();
}

ScenarioBundle load_scenario_bundle(const std::filesystem::path& scenario_path,
                                    const std::optional<std::filesystem::path>& catalog_override) {
  ScenarioBundle b{load_scenario(scenario_path), {}};
  if (catalog_override) {
    b.catalog = load_vuln_catalog(*catalog_override);
  } else {
    if (b.scenario.catalog.empty()) throw ScenarioError("scenario '" + b.scenario.id + "' names no catalog");
    b.catalog = load_vuln_catalog(scenario_path.parent_path() / b.scenario.catalog);
  }
  return b;
}

}  // namespace cits
