#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trafwarden/gestures.hpp"
#include "trafwarden/rng.hpp"
#include "trafwarden/scenario.hpp"

namespace trafwarden {

enum class ControlMode : std::uint8_t { WizardOfOz, RoundRobin, QueuePriority };

std::string_view mode_name(ControlMode m);
std::optional<ControlMode> mode_from_name(std::string_view name);
constexpr bool is_autonomous(ControlMode m) { return m != ControlMode::WizardOfOz; }

enum class CommandSource : std::uint8_t { Operator, Policy, System };

std::string_view source_name(CommandSource s);
std::optional<CommandSource> source_from_name(std::string_view name);

/// A gesture, optionally paired with a Go grant for one approach pair. No
/// gesture means "both front and behind go" (or left and right), so a pair
/// is opened by the opposite pair's stop gesture plus this grant.
struct SignalCommand {
  TrafficSignal signal = TrafficSignal::AllStop;
  double issued_at = 0.0;
  CommandSource source = CommandSource::Operator;
  std::optional<ApproachPair> grant;

  friend bool operator==(const SignalCommand&, const SignalCommand&) = default;
};

/// Commanded permissions after the command's delta and grant.
PermissionState resulting_state(const PermissionState& state, const SignalCommand& cmd);

struct PolicyConfig {
  ControlMode mode = ControlMode::QueuePriority;
  double min_green = 8.0;
  double max_green = 30.0;
  double interim = 3.0;
  double sensor_noise = 0.0;

  static PolicyConfig from_scenario(const ScenarioConfig& cfg, ControlMode mode);
  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

struct SensorReading {
  std::array<double, 4> queue{};
  double timestamp = 0.0;

  double operator[](Approach a) const { return queue[index_of(a)]; }
};

/// Noise-free counts pass through unchanged when sigma is 0; otherwise each
/// count gets Gaussian noise, is rounded, and clamped at zero.
SensorReading read_sensors(const std::array<std::uint64_t, 4>& stopped, double now, double sigma,
                           SplitMix64& rng);

enum class Phase : std::uint8_t { FrontBehindGo, LeftRightGo, LeftGo, RightGo, AllStop, Interim };

std::string_view phase_name(Phase p);

struct ControllerState {
  Phase phase = Phase::AllStop;
  Phase next = Phase::AllStop;  // meaningful while phase == Interim
  double phase_start = 0.0;
  // All-Stop after Go traffic: the next entry goes through an interim first.
  bool needs_clearance = false;
};

/// Commands that put the intersection into `phase`. FrontBehindGo and
/// LeftRightGo use the opposite pair's stop gesture with a grant.
std::vector<SignalCommand> phase_entry_commands(Phase phase, double now,
                                                CommandSource source = CommandSource::Policy);

/// Fixed cycle FrontBehindGo -> LeftRightGo -> ... with green = max_green and
/// a ChangeSign interim between. Ignores sensors.
std::vector<SignalCommand> round_robin(ControllerState& cs, const PolicyConfig& cfg, double now);

/// Serves the busier stream. Decision points start at min_green; a switch
/// happens when the waiting demand strictly exceeds the served demand, or at
/// max_green when anything is waiting. Ties keep the current phase.
std::vector<SignalCommand> queue_priority(ControllerState& cs, const PolicyConfig& cfg,
                                          const SensorReading& sensors, double now);

enum class Verdict : std::uint8_t { Accept, AcceptWithWarning, Reject };

std::string_view verdict_name(Verdict v);
std::optional<Verdict> verdict_from_name(std::string_view name);

struct Validation {
  Verdict verdict = Verdict::Accept;
  std::vector<std::string> warnings;
};

/// Clearance bookkeeping for validate_command.
struct ClearanceTracker {
  // Approaches commanded Go since the last ChangeSign (or session start).
  std::array<bool, 4> opened_since_clearance{};
  std::optional<double> last_change_sign;

  void record(const PermissionState& before, const SignalCommand& cmd);
};

/// Flags a command when its resulting state has crossing streams both Go, or
/// when it opens an approach whose crossing stream has been opened since the
/// last ChangeSign. Autonomous mode rejects flagged commands; Wizard-of-Oz
/// accepts them with a warning.
Validation validate_command(const PermissionState& state, const SignalCommand& cmd,
                            ControlMode mode, const ClearanceTracker& clearance);

}  // namespace trafwarden
