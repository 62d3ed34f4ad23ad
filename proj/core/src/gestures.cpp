#include "trafwarden/gestures.hpp"

namespace trafwarden {

namespace {

constexpr std::array<std::string_view, 8> kSignalNames = {
    "front_stop", "behind_stop", "front_behind_stop", "left_right_stop",
    "all_stop",   "start_left",  "start_right",       "change_sign",
};

// Per-arm joint values in device order: shoulder, half_arm, mid_arm, arm,
// half_hand, hand.
using ArmValues = std::array<double, kArmJointCount>;

ArmValues arm_values(ArmPrimitive p, Side side) {
  const bool right = side == Side::Right;
  switch (p) {
    case ArmPrimitive::Up:
      return {0.0, -1.11, 0.0, 0.7, 0.0, 0.0};
    case ArmPrimitive::Down:
      return {0.0, 1.5, 0.0, 0.0, 0.0, 0.0};
    case ArmPrimitive::Straight:
      return {right ? 0.5 : -0.5, 0.0, 0.0, 0.0, 0.0, 0.0};
    case ArmPrimitive::Half:
      return {0.5, 0.0, 1.5, 2.29, 0.0, 0.0};
    case ArmPrimitive::HalfUp:
      return {right ? -0.5 : 0.5, -1.0, 0.0, 0.0, -1.5, 0.0};
    case ArmPrimitive::HalfFold:
      return {right ? -0.5 : 0.5, -0.7, 0.0, 1.8, -1.5, 0.0};
    case ArmPrimitive::Rest:
      break;
  }
  return {};
}

PermissionDelta make_delta(std::initializer_list<std::pair<Approach, Permission>> items) {
  PermissionDelta d;
  for (const auto& [a, p] : items) d.assign[index_of(a)] = p;
  return d;
}

constexpr auto Stop = Permission::Stop;
constexpr auto Go = Permission::Go;

}  // namespace

std::string_view approach_name(Approach a) {
  switch (a) {
    case Approach::Front: return "front";
    case Approach::Behind: return "behind";
    case Approach::Left: return "left";
    case Approach::Right: return "right";
  }
  return "?";
}

std::string_view pair_name(ApproachPair p) {
  return p == ApproachPair::FrontBehind ? "front_behind" : "left_right";
}

std::optional<ApproachPair> pair_from_name(std::string_view name) {
  if (name == "front_behind") return ApproachPair::FrontBehind;
  if (name == "left_right") return ApproachPair::LeftRight;
  return std::nullopt;
}

std::string_view permission_name(Permission p) { return p == Permission::Go ? "go" : "stop"; }

PermissionState apply_delta(const PermissionState& state, const PermissionDelta& delta) {
  PermissionState out = state;
  for (auto a : kAllApproaches) {
    if (auto p = delta[a]) out[a] = *p;
  }
  return out;
}

bool is_conflicting(const PermissionState& s) {
  const bool fb = s.go(Approach::Front) || s.go(Approach::Behind);
  const bool lr = s.go(Approach::Left) || s.go(Approach::Right);
  return fb && lr;
}

std::string_view primitive_name(ArmPrimitive p) {
  switch (p) {
    case ArmPrimitive::Up: return "up";
    case ArmPrimitive::Down: return "down";
    case ArmPrimitive::Straight: return "straight";
    case ArmPrimitive::Half: return "half";
    case ArmPrimitive::HalfUp: return "half_up";
    case ArmPrimitive::HalfFold: return "half_fold";
    case ArmPrimitive::Rest: return "rest";
  }
  return "?";
}

double head_angle(HeadOrientation h) {
  switch (h) {
    case HeadOrientation::LookLeft: return 1.1;
    case HeadOrientation::LookRight: return -1.1;
    case HeadOrientation::Center: break;
  }
  return 0.0;
}

std::string_view signal_name(TrafficSignal s) { return kSignalNames[static_cast<std::size_t>(s)]; }

std::optional<TrafficSignal> signal_from_name(std::string_view name) {
  for (auto s : kAllSignals) {
    if (signal_name(s) == name) return s;
  }
  return std::nullopt;
}

RobotPose primitive_partial(ArmPrimitive p, Side side) {
  const auto values = arm_values(p, side);
  RobotPose pose;
  for (std::size_t k = 0; k < kArmJointCount; ++k) {
    pose.set(arm_joint(side, static_cast<ArmJoint>(k)), values[k]);
  }
  return pose;
}

PermissionDelta permission_delta(TrafficSignal s) {
  using A = Approach;
  switch (s) {
    case TrafficSignal::FrontStop: return make_delta({{A::Front, Stop}});
    case TrafficSignal::BehindStop: return make_delta({{A::Behind, Stop}});
    case TrafficSignal::FrontBehindStop: return make_delta({{A::Front, Stop}, {A::Behind, Stop}});
    case TrafficSignal::LeftRightStop: return make_delta({{A::Left, Stop}, {A::Right, Stop}});
    case TrafficSignal::StartLeft: return make_delta({{A::Left, Go}, {A::Front, Stop}});
    case TrafficSignal::StartRight: return make_delta({{A::Right, Go}});
    case TrafficSignal::AllStop:
    case TrafficSignal::ChangeSign:
      return make_delta({{A::Front, Stop}, {A::Behind, Stop}, {A::Left, Stop}, {A::Right, Stop}});
  }
  return {};
}

SignalDefinition signal_definition(TrafficSignal s) {
  using P = ArmPrimitive;
  using H = HeadOrientation;
  SignalDefinition def;
  def.delta = permission_delta(s);
  switch (s) {
    case TrafficSignal::FrontStop:
      def.left = P::Down, def.right = P::Up;
      break;
    case TrafficSignal::BehindStop:
      def.left = P::Straight, def.right = P::Down;
      break;
    case TrafficSignal::FrontBehindStop:
      def.left = P::Straight, def.right = P::Up;
      break;
    case TrafficSignal::LeftRightStop:
      def.left = P::HalfUp, def.right = P::HalfUp;
      break;
    case TrafficSignal::AllStop:
      def.left = P::Up, def.right = P::Up;
      break;
    case TrafficSignal::StartLeft:
      def.left = P::Half, def.right = P::Up, def.head = H::LookLeft;
      def.role = SignalRole::GoClass;
      break;
    case TrafficSignal::StartRight:
      def.left = P::Straight, def.right = P::Half, def.head = H::LookRight;
      def.role = SignalRole::GoClass;
      break;
    case TrafficSignal::ChangeSign:
      def.left = P::HalfFold, def.right = P::HalfFold;
      def.role = SignalRole::Interim;
      break;
  }
  return def;
}

RobotPose signal_target_pose(TrafficSignal s) {
  const auto def = signal_definition(s);
  auto pose = merge_partial(RobotPose::rest(), primitive_partial(def.left, Side::Left));
  pose = merge_partial(pose, primitive_partial(def.right, Side::Right));
  pose.set(JointId::HeadYaw, head_angle(def.head));
  return pose;
}

}  // namespace trafwarden
