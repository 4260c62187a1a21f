#include "cits/report.hpp"

#include <sstream>

#include "json.hpp"

namespace cits {

namespace {

using OJson = nlohmann::ordered_json;

OJson opt(const std::optional<std::size_t>& v) { return v ? OJson(*v) : OJson(nullptr); }

}  // namespace

std::string report_json(const SimulationResult& run) {
  OJson j;
  j["scenario"] = run.scenario ? OJson(run.scenario->id) : OJson(nullptr);
  j["attacker"] = run.scenario ? OJson(run.scenario->attacker) : OJson(nullptr);
  j["seed"] = run.config.seed;
  j["horizon_ms"] = run.config.horizon_ms;
  j["tick_ms"] = run.config.tick_ms;

  OJson steps = OJson::array();
  if (run.scenario) {
    for (std::size_t i = 0; i < run.scenario->steps.size(); ++i) {
      const auto& s = run.scenario->steps[i];
      const auto& v = run.outcome.steps.at(i);
      OJson o;
      o["index"] = i;
      o["cve"] = s.cve;
      o["at_ms"] = s.at_ms;
      o["status"] = std::string(to_string(v.status));
      o["failing_atom"] = v.failing_atom.empty() ? OJson(nullptr) : OJson(v.failing_atom);
      OJson effects = OJson::array();
      for (const auto& e : run.effects) {
        if (e.step != i) continue;
        OJson eo;
        eo["kind"] = std::string(to_string(e.kind));
        eo["detail"] = e.detail;
        eo["trace_index"] = e.trace_index;
        effects.push_back(std::move(eo));
      }
      o["effects"] = std::move(effects);
      steps.push_back(std::move(o));
    }
  }
  j["steps"] = std::move(steps);

  OJson caps = OJson::array();
  for (const auto& g : run.outcome.timeline) {
    OJson o;
    o["t"] = g.time;
    o["capability"] = g.capability.str();
    o["step"] = g.step;
    caps.push_back(std::move(o));
  }
  j["capabilities"] = std::move(caps);

  OJson alarms = OJson::array();
  for (const auto& a : run.alarms) {
    OJson o;
    o["t"] = a.time;
    o["kind"] = std::string(to_string(a.kind));
    o["subject"] = a.subject;
    o["details"] = a.details;
    o["cause_step"] = opt(a.cause_step);
    o["cause_cve"] = a.cause_step && run.scenario ? OJson(run.scenario->steps.at(*a.cause_step).cve)
                                                  : OJson(nullptr);
    o["trace_index"] = opt(a.trace_index);
    alarms.push_back(std::move(o));
  }
  j["alarms"] = std::move(alarms);

  OJson counts;
  std::size_t succeeded = 0, failed = 0, not_reached = 0, pending = 0;
  for (const auto& v : run.outcome.steps) {
    switch (v.status) {
      case StepStatus::Succeeded: ++succeeded; break;
      case StepStatus::PreconditionFailed: ++failed; break;
      case StepStatus::NotReached: ++not_reached; break;
      case StepStatus::Pending: ++pending; break;
    }
  }
  counts["steps_succeeded"] = succeeded;
  counts["steps_failed"] = failed;
  counts["steps_not_reached"] = not_reached;
  counts["steps_pending"] = pending;
  counts["alarms"] = run.alarms.size();
  OJson by_kind;
  for (auto k : all_alarm_kinds()) {
    std::size_t n = 0;
    for (const auto& a : run.alarms) n += a.kind == k;
    by_kind[std::string(to_string(k))] = n;
  }
  counts["by_kind"] = std::move(by_kind);
  j["counts"] = std::move(counts);

  const auto& s = run.summary;
  OJson st;
  st["events_processed"] = s.events_processed;
  st["final_clock"] = s.final_clock;
  st["messages_sent"] = s.messages_sent;
  st["messages_delivered"] = s.messages_delivered;
  st["frames_emitted"] = s.frames_emitted;
  st["frames_delivered"] = s.frames_delivered;
  st["frames_dropped"] = s.frames_dropped;
  st["frames_in_flight"] = s.frames_in_flight;
  st["duplicates_suppressed"] = s.duplicates_suppressed;
  st["trace_records"] = run.trace.size();
  j["run"] = std::move(st);

  return j.dump(2) + "\n";
}

std::string report_text(const SimulationResult& run) {
  std::ostringstream os;
  os << "scenario: " << (run.scenario ? run.scenario->id : std::string("(none)")) << "  seed "
     << run.config.seed << "  horizon " << run.config.horizon_ms << " ms\n";
  if (run.scenario) {
    for (std::size_t i = 0; i < run.scenario->steps.size(); ++i) {
      const auto& v = run.outcome.steps.at(i);
      os << "  step " << i + 1 << " " << run.scenario->steps[i].cve << ": " << to_string(v.status);
      if (!v.failing_atom.empty()) os << " (" << v.failing_atom << ")";
      os << "\n";
    }
  }
  os << "alarms: " << run.alarms.size() << "\n";
  for (const auto& a : run.alarms) {
    os << "  t=" << a.time << " " << to_string(a.kind) << " " << a.subject;
    if (a.cause_step && run.scenario) os << " <- " << run.scenario->steps.at(*a.cause_step).cve;
    os << "\n";
  }
  os << "messages: " << run.summary.messages_sent << " sent, " << run.summary.messages_delivered
     << " delivered\n";
  return os.str();
}

}  // namespace cits
