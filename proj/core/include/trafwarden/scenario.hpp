#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "trafwarden/gestures.hpp"

namespace trafwarden {

struct ScenarioConfig {
  std::array<double, 4> arrival_rate{0.1, 0.1, 0.1, 0.1};  // veh/s, indexed by Approach
  double free_speed = 10.0;                                 // m/s
  double accel = 3.0;                                       // m/s^2, accel and decel
  double vehicle_length = 4.5;                              // m
  double standstill_gap = 2.0;                              // m
  double approach_length = 150.0;                           // m
  double box_size = 20.0;                                   // m
  double reaction_delay = 1.0;                              // s
  double joint_speed = 1.0;                                 // rad/s
  double interim = 3.0;                                     // s
  std::uint64_t seed = 1;
  double duration = 600.0;  // s
  double dt = 0.05;         // s

  // Autonomous policy timing.
  double min_green = 8.0;
  double max_green = 30.0;
  double sensor_noise = 0.0;  // vehicles, standard deviation

  double lambda(Approach a) const { return arrival_rate[index_of(a)]; }
  double& lambda(Approach a) { return arrival_rate[index_of(a)]; }

  /// Straight-through time from spawn to leaving the box at free speed.
  double free_flow_time() const {
    return (approach_length + box_size + vehicle_length) / free_speed;
  }
  std::int64_t total_steps() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Carries the offending field (or line) so callers can report it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Throws ConfigError naming the first field that violates an invariant.
void validate(const ScenarioConfig& cfg);

/// Parses `key = value` lines; `#` starts a comment. Absent keys keep their
/// defaults. The result is validated.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Every key, one per line, in a form parse_scenario reads back exactly.
std::string write_scenario(const ScenarioConfig& cfg);

/// FNV-1a 64 of write_scenario(cfg), as 16 hex digits.
std::string scenario_hash(const ScenarioConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace trafwarden
