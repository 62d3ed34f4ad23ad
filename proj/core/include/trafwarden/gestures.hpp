#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "trafwarden/kinematics.hpp"

namespace trafwarden {

enum class Approach : std::uint8_t { Front, Behind, Left, Right };

inline constexpr std::array<Approach, 4> kAllApproaches = {Approach::Front, Approach::Behind,
                                                           Approach::Left, Approach::Right};

constexpr std::size_t index_of(Approach a) { return static_cast<std::size_t>(a); }

std::string_view approach_name(Approach a);

/// Front/Behind form one stream, Left/Right the crossing one.
enum class ApproachPair : std::uint8_t { FrontBehind, LeftRight };

constexpr ApproachPair pair_of(Approach a) {
  return a == Approach::Front || a == Approach::Behind ? ApproachPair::FrontBehind
                                                       : ApproachPair::LeftRight;
}

std::string_view pair_name(ApproachPair p);
std::optional<ApproachPair> pair_from_name(std::string_view name);

enum class Permission : std::uint8_t { Stop, Go };

std::string_view permission_name(Permission p);

struct PermissionState {
  std::array<Permission, 4> value{Permission::Stop, Permission::Stop, Permission::Stop,
                                  Permission::Stop};

  static PermissionState all_stop() { return {}; }

  Permission operator[](Approach a) const { return value[index_of(a)]; }
  Permission& operator[](Approach a) { return value[index_of(a)]; }
  bool go(Approach a) const { return (*this)[a] == Permission::Go; }

  friend bool operator==(const PermissionState&, const PermissionState&) = default;
};

/// Per-approach reassignment; nullopt leaves the approach unchanged.
struct PermissionDelta {
  std::array<std::optional<Permission>, 4> assign{};

  std::optional<Permission> operator[](Approach a) const { return assign[index_of(a)]; }
  friend bool operator==(const PermissionDelta&, const PermissionDelta&) = default;
};

PermissionState apply_delta(const PermissionState& state, const PermissionDelta& delta);

/// Crossing streams both hold Go.
bool is_conflicting(const PermissionState& state);

// Single-arm primitives.
enum class ArmPrimitive : std::uint8_t { Up, Down, Straight, Half, HalfUp, HalfFold, Rest };

inline constexpr std::array<ArmPrimitive, 7> kAllPrimitives = {
    ArmPrimitive::Up,     ArmPrimitive::Down,     ArmPrimitive::Straight, ArmPrimitive::Half,
    ArmPrimitive::HalfUp, ArmPrimitive::HalfFold, ArmPrimitive::Rest,
};

std::string_view primitive_name(ArmPrimitive p);

enum class HeadOrientation : std::uint8_t { Center, LookLeft, LookRight };

double head_angle(HeadOrientation h);

enum class TrafficSignal : std::uint8_t {
  FrontStop,
  BehindStop,
  FrontBehindStop,
  LeftRightStop,
  AllStop,
  StartLeft,
  StartRight,
  ChangeSign,
};

inline constexpr std::array<TrafficSignal, 8> kAllSignals = {
    TrafficSignal::FrontStop,     TrafficSignal::BehindStop, TrafficSignal::FrontBehindStop,
    TrafficSignal::LeftRightStop, TrafficSignal::AllStop,    TrafficSignal::StartLeft,
    TrafficSignal::StartRight,    TrafficSignal::ChangeSign,
};

/// Snake-case wire name, e.g. "front_behind_stop".
std::string_view signal_name(TrafficSignal s);
std::optional<TrafficSignal> signal_from_name(std::string_view name);

enum class SignalRole : std::uint8_t { StopClass, GoClass, Interim };

struct SignalDefinition {
  ArmPrimitive left = ArmPrimitive::Rest;
  ArmPrimitive right = ArmPrimitive::Rest;
  HeadOrientation head = HeadOrientation::Center;
  PermissionDelta delta;
  SignalRole role = SignalRole::StopClass;
};

/// Joint assignments of one arm for a primitive. Only that arm's six joints
/// are assigned.
RobotPose primitive_partial(ArmPrimitive p, Side side);

SignalDefinition signal_definition(TrafficSignal s);

PermissionDelta permission_delta(TrafficSignal s);

/// Both arm primitives and the head angle merged onto RobotPose::rest().
RobotPose signal_target_pose(TrafficSignal s);

}  // namespace trafwarden
