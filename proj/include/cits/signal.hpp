#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "cits/capability.hpp"
#include "cits/topology.hpp"

namespace cits {

enum class OverrideMode { DualGreen, Hold };

std::string_view to_string(OverrideMode mode);
std::optional<OverrideMode> override_mode_from_string(std::string_view text);

/// Forces the listed phases active for `duration_ticks`, regardless of
/// conflicts or pending preemptions.
struct SignalOverride {
  OverrideMode mode = OverrideMode::DualGreen;
  std::vector<std::size_t> phases;
  int duration_ticks = 1;
  NodeId issuer;
};

struct PreemptionArrival {
  std::uint64_t request_id = 0;
  std::string approach;
};

/// State of one intersection after one controller tick.
struct PhaseRecord {
  std::int64_t tick = 0;
  Millis time = 0;
  std::vector<std::size_t> active;
  bool override_active = false;
  /// Preemption requests that arrived since the previous tick.
  std::vector<PreemptionArrival> arrivals;
  /// Requests whose approach got a serving phase this tick.
  std::vector<std::uint64_t> served;
  /// Phase index changed this tick.
  bool transitioned = false;
};

/// Fixed-cycle controller with emergency preemption.
///
/// A pending preemption activates its phase at the next tick and holds it
/// for that phase's dwell. Requests arriving while another preemption holds
/// a phase that does not serve them wait in (time, seq) order.
class SignalController {
 public:
  SignalController(std::string intersection, SignalPlan plan);

  const std::string& intersection() const { return intersection_; }
  const SignalPlan& plan() const { return plan_; }
  std::size_t current_phase() const { return current_; }
  const std::vector<std::size_t>& active() const { return active_; }
  std::size_t pending_preemptions() const { return pending_.size(); }
  bool override_active() const { return override_.has_value(); }

  /// Throws UnknownApproach.
  void request_preemption(std::uint64_t request_id, const std::string& approach);

  /// Accepted only when the issuer holds SignalControl over this
  /// intersection's controller node. Returns whether it was accepted.
  bool submit_override(const SignalOverride& command, const CapabilitySet& issuer_caps);

  /// Advances one tick.
  PhaseRecord step(Millis now);

 private:
  struct Pending {
    std::uint64_t request_id;
    std::string approach;
    std::size_t phase;
  };

  bool serves(std::size_t phase, const std::string& approach) const;
  void activate(std::size_t phase);

  std::string intersection_;
  SignalPlan plan_;
  std::size_t current_ = 0;
  int ticks_in_phase_ = 0;
  bool holding_ = false;
  std::int64_t tick_ = 0;
  std::vector<std::size_t> active_;
  std::deque<Pending> pending_;
  std::vector<PreemptionArrival> arrivals_;
  std::optional<SignalOverride> override_;
};

}  // namespace cits
