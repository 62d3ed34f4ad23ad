#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "trafwarden/gestures.hpp"
#include "trafwarden/kinematics.hpp"
#include "trafwarden/rng.hpp"
#include "trafwarden/scenario.hpp"

namespace trafwarden {

struct Vehicle {
  std::uint64_t id = 0;
  Approach approach = Approach::Front;
  double position = 0.0;  // m to the stop line; negative inside the box
  double speed = 0.0;     // m/s
  double spawn_time = 0.0;
  std::optional<double> cross_complete_time;
  // Too close to brake when the approach last turned Stop; may proceed.
  bool committed = false;

  bool in_box() const { return position < 0.0; }
};

struct EffectivePermission {
  PermissionState value;
  std::array<double, 4> since{};

  Permission operator[](Approach a) const { return value[a]; }
  friend bool operator==(const EffectivePermission&, const EffectivePermission&) = default;
};

/// What drivers obey. A Stop in `commanded` takes effect at `now`. A Go takes
/// effect at gesture_done + reaction once the gesture motion has finished;
/// until then the prior value holds.
EffectivePermission effective_permissions(const EffectivePermission& prior,
                                          const PermissionState& commanded,
                                          std::optional<double> gesture_done, double now,
                                          double reaction);

struct RobotState {
  RobotPose pose = RobotPose::rest();
  RobotPose target = RobotPose::rest();
  std::optional<TrafficSignal> signal;
  // Time the current gesture finished moving; empty while in motion.
  std::optional<double> motion_done = 0.0;
};

struct ApproachCounters {
  std::uint64_t attempted = 0;
  std::uint64_t spawned = 0;
  std::uint64_t blocked = 0;
  std::uint64_t crossed = 0;
  double crossed_delay_sum = 0.0;
  std::uint64_t max_queue = 0;
};

struct SimState {
  std::int64_t step_index = 0;
  double clock = 0.0;
  // Per approach, ordered front-most (smallest position) first.
  std::array<std::vector<Vehicle>, 4> lanes;
  PermissionState commanded;
  EffectivePermission effective;
  RobotState robot;
  SplitMix64 rng{1};
  std::uint64_t next_vehicle_id = 1;

  std::array<ApproachCounters, 4> counters;
  std::uint64_t total_max_queue = 0;
  std::uint64_t conflicts = 0;
  std::set<std::pair<std::uint64_t, std::uint64_t>> conflict_pairs;
  // Vehicles that crossed the stop line under an effective Stop without
  // being committed. Stays zero unless the dynamics are broken.
  std::uint64_t stop_line_violations = 0;
  std::uint64_t committed_crossings = 0;
  std::uint64_t commands_applied = 0;

  const std::vector<Vehicle>& lane(Approach a) const { return lanes[index_of(a)]; }
  std::vector<Vehicle>& lane(Approach a) { return lanes[index_of(a)]; }
  std::size_t in_system() const;
};

SimState make_initial_state(const ScenarioConfig& cfg);

/// Per-approach Bernoulli(lambda * dt) arrival at the far end of the
/// approach; one uniform draw per approach per call, in Front, Behind, Left,
/// Right order. An arrival is blocked when the last vehicle on the approach
/// is still within vehicle_length + standstill_gap of the entrance.
std::vector<Vehicle> spawn_arrivals(SimState& state, const ScenarioConfig& cfg);

/// Applies a gesture: commanded permissions take the signal's delta, the
/// robot starts moving toward the signal pose, and Stops act immediately.
void apply_signal(SimState& state, const ScenarioConfig& cfg, TrafficSignal signal);

/// Grants Go to both approaches of a pair without a gesture of its own; it
/// becomes effective with the current gesture's completion.
void apply_grant(SimState& state, const ScenarioConfig& cfg, ApproachPair pair);

/// Advances one time step.
void step(SimState& state, const ScenarioConfig& cfg);

/// Counts newly overlapping Front/Behind and Left/Right pairs inside the box
/// and returns the number added this call. Each pair is counted once.
std::uint64_t detect_conflicts(SimState& state);

/// Vehicles stopped (speed < 0.1 m/s) before the stop line.
std::array<std::uint64_t, 4> queue_lengths(const SimState& state);

struct ApproachMetrics {
  std::uint64_t arrivals = 0;
  std::uint64_t crossed = 0;
  std::uint64_t blocked = 0;
  std::uint64_t in_system = 0;
  double mean_delay = 0.0;
  std::uint64_t max_queue = 0;
  friend bool operator==(const ApproachMetrics&, const ApproachMetrics&) = default;
};

struct MetricsReport {
  std::array<ApproachMetrics, 4> approach;
  ApproachMetrics total;
  std::uint64_t conflicts = 0;
  std::uint64_t trace_length = 0;
  double end_time = 0.0;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Delay per vehicle is travel time beyond free flow, floored at zero.
/// Vehicles still in the system count up to the current clock.
MetricsReport collect_metrics(const SimState& state, const ScenarioConfig& cfg);

/// Fixed columns: approach,arrivals,crossed,mean_delay_s,max_queue; one row
/// per approach, then a total row and a conflicts row.
std::string metrics_csv(const MetricsReport& report);

}  // namespace trafwarden
