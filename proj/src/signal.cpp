#include "cits/signal.hpp"

#include <algorithm>

#include "cits/errors.hpp"

namespace cits {

std::string_view to_string(OverrideMode mode) {
  return mode == OverrideMode::DualGreen ? "dual_green" : "hold";
}

std::optional<OverrideMode> override_mode_from_string(std::string_view text) {
  if (text == "dual_green") return OverrideMode::DualGreen;
  if (text == "hold") return OverrideMode::Hold;
  return std::nullopt;
}

SignalController::SignalController(std::string intersection, SignalPlan plan)
    : intersection_(std::move(intersection)), plan_(std::move(plan)) {
  if (plan_.phases.empty()) throw Error("signal '" + intersection_ + "' has no phases");
  active_ = {current_};
}

bool SignalController::serves(std::size_t phase, const std::string& approach) const {
  return plan_.serves[phase].count(approach) > 0;
}

void SignalController::request_preemption(std::uint64_t request_id, const std::string& approach) {
  const auto phase = plan_.phase_serving(approach);
  if (!phase) {
    throw UnknownApproach("approach '" + approach + "' not served at '" + intersection_ + "'");
  }
  pending_.push_back({request_id, approach, *phase});
  arrivals_.push_back({request_id, approach});
}

bool SignalController::submit_override(const SignalOverride& command,
                                       const CapabilitySet& issuer_caps) {
  if (!issuer_caps.has(CapabilityKind::SignalControl, plan_.controller)) return false;
  for (auto p : command.phases) {
    if (p >= plan_.phases.size()) return false;
  }
  if (command.phases.empty() || command.duration_ticks < 1) return false;
  override_ = command;
  return true;
}

void SignalController::activate(std::size_t phase) {
  current_ = phase;
  ticks_in_phase_ = 0;
  holding_ = true;
}

PhaseRecord SignalController::step(Millis now) {
  PhaseRecord rec;
  rec.tick = ++tick_;
  rec.time = now;
  rec.arrivals = std::move(arrivals_);
  arrivals_.clear();
  const auto before = active_;

  if (override_) {
    active_ = override_->phases;
    rec.override_active = true;
    if (--override_->duration_ticks <= 0) {
      // The cycle resumes from the phase that was current before the override.
      override_.reset();
      ticks_in_phase_ = 0;
    }
  } else {
    if (holding_) {
      if (++ticks_in_phase_ >= plan_.dwell_ticks[current_]) {
        holding_ = false;
        ticks_in_phase_ = 0;
      }
    } else if (++ticks_in_phase_ >= plan_.dwell_ticks[current_]) {
      current_ = (current_ + 1) % plan_.phases.size();
      ticks_in_phase_ = 0;
    }
    if (!holding_ && !pending_.empty()) activate(pending_.front().phase);
    active_ = {current_};
  }

  // Anything waiting whose approach is green right now counts as served.
  for (auto it = pending_.begin(); it != pending_.end();) {
    const bool green = std::any_of(active_.begin(), active_.end(),
                                   [&](std::size_t p) { return serves(p, it->approach); });
    if (green && !rec.override_active) {
      rec.served.push_back(it->request_id);
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  rec.active = active_;
  rec.transitioned = before != active_;
  return rec;
}

}  // namespace cits
