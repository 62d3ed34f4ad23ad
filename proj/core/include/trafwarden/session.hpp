#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "trafwarden/controller.hpp"
#include "trafwarden/kinematics.hpp"
#include "trafwarden/scenario.hpp"
#include "trafwarden/sim.hpp"
#include "trafwarden/trace.hpp"

namespace trafwarden {

struct VehicleView {
  std::uint64_t id = 0;
  Approach approach = Approach::Front;
  double position = 0.0;
  double speed = 0.0;
};

/// Immutable copy of what the operator sees at one instant.
struct Snapshot {
  std::uint64_t seq = 0;
  double clock = 0.0;
  ControlMode mode = ControlMode::WizardOfOz;
  Phase phase = Phase::AllStop;
  std::vector<VehicleView> vehicles;
  PermissionState permissions;
  EffectivePermission effective;
  RobotPose robot_pose;
  PoseFrame fk;
  std::array<std::uint64_t, 4> queues{};
  std::optional<TrafficSignal> current_signal;
  std::vector<std::string> warnings;
};

/// One simulation plus whoever is issuing commands to it. Commands are
/// applied at step boundaries, in submission order.
class Session {
 public:
  Session(ScenarioConfig cfg, ControlMode mode);

  const ScenarioConfig& config() const { return cfg_; }
  ControlMode mode() const { return mode_; }
  const SimState& state() const { return sim_; }
  const ControllerState& controller() const { return controller_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  bool finished() const { return sim_.step_index >= cfg_.total_steps(); }

  /// Switching into an autonomous mode restarts the policy; if anything was
  /// opened since the last clearance, it begins with a ChangeSign.
  void set_mode(ControlMode mode);

  /// Operator gesture. A pair-stop gesture also grants Go to the opposite
  /// pair (left_right_stop lets front/behind flow and vice versa). Rejected
  /// outright, and not traced, while an autonomous policy is in control.
  Validation submit_operator(TrafficSignal signal);

  /// Validates under the mode implied by the source (policy commands are
  /// held to autonomous rules), applies unless rejected, and traces it.
  Validation submit(const SignalCommand& cmd);

  /// Polls the policy when due, then advances the simulation by one step.
  void advance();
  void run_to_end();

  MetricsReport metrics() const;
  Trace trace_record() const;
  std::string trace_text() const;

  Snapshot snapshot();
  std::vector<std::string> active_warnings() const;

 private:
  ScenarioConfig cfg_;
  ControlMode mode_;
  PolicyConfig policy_;
  SimState sim_;
  ControllerState controller_;
  ClearanceTracker clearance_;
  SplitMix64 sensor_rng_;
  std::int64_t poll_steps_ = 1;
  std::vector<TraceEntry> trace_;
  std::uint64_t trace_lines_ = 0;
  std::uint64_t seq_ = 0;
};

/// Operator key press expressed as a command, with the pair-grant
/// convention applied.
SignalCommand operator_command(TrafficSignal signal, double now);

struct RunResult {
  MetricsReport metrics;
  std::string csv;
  std::string trace;
};

RunResult run_headless(const ScenarioConfig& cfg, ControlMode policy);

/// Replays a recorded trace against a scenario. Throws TraceError when the
/// scenario hash does not match (before running), or when a command's
/// verdict or the final metrics differ from the recording.
RunResult replay(const ScenarioConfig& cfg, std::string_view trace_text);

std::string metrics_hash(const MetricsReport& report);

}  // namespace trafwarden
