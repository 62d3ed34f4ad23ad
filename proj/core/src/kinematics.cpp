#include "trafwarden/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trafwarden {

namespace {

constexpr std::array<std::string_view, kJointCount> kDeviceNames = {
    "arm_left_1_joint",  "arm_left_2_joint",  "arm_left_3_joint",  "arm_left_4_joint",
    "arm_left_5_joint",  "arm_left_6_joint",  "arm_right_1_joint", "arm_right_2_joint",
    "arm_right_3_joint", "arm_right_4_joint", "arm_right_5_joint", "arm_right_6_joint",
    "torso_lift_joint",  "head_1_joint",
};

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "left_shoulder",  "left_half_arm",  "left_mid_arm",  "left_arm",
    "left_half_hand", "left_hand",      "right_shoulder", "right_half_arm",
    "right_mid_arm",  "right_arm",      "right_half_hand", "right_hand",
    "torso_lift",     "head_yaw",
};

bool is_rotary(JointId j) { return j != JointId::TorsoLift; }

void require_positive(double value, const char* what) {
  if (!(value > 0.0)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

ArmFrame arm_chain(const RobotPose& pose, Side side, const LinkModel& links, double shoulder_y) {
  const double outward = side == Side::Left ? 1.0 : -1.0;
  const double abduction = pose[arm_joint(side, ArmJoint::Shoulder)];
  const double elevation =
      outward * abduction - pose[arm_joint(side, ArmJoint::HalfArm)];
  const double forearm_dir = elevation + pose[arm_joint(side, ArmJoint::Arm)];
  const double hand_dir = forearm_dir + pose[arm_joint(side, ArmJoint::HalfHand)];

  // Chain in (outward, up) coordinates, then flip x for the right arm.
  const double shoulder_u = 0.5 * links.shoulder_width;
  const double elbow_u = shoulder_u + links.upper_arm * std::cos(elevation);
  const double elbow_v = shoulder_y + links.upper_arm * std::sin(elevation);
  const double wrist_u = elbow_u + links.forearm * std::cos(forearm_dir);
  const double wrist_v = elbow_v + links.forearm * std::sin(forearm_dir);
  const double tip_u = wrist_u + links.hand * std::cos(hand_dir);
  const double tip_v = wrist_v + links.hand * std::sin(hand_dir);

  return ArmFrame{
      .shoulder = {outward * shoulder_u, shoulder_y},
      .elbow = {outward * elbow_u, elbow_v},
      .wrist = {outward * wrist_u, wrist_v},
      .fingertip = {outward * tip_u, tip_v},
  };
}

}  // namespace

std::string_view device_name(JointId j) { return kDeviceNames[index_of(j)]; }

std::string_view joint_name(JointId j) { return kJointNames[index_of(j)]; }

std::optional<JointId> joint_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    if (kJointNames[i] == name) return static_cast<JointId>(i);
  }
  return std::nullopt;
}

RobotPose RobotPose::zero() {
  RobotPose p;
  for (auto j : kAllJoints) p.set(j, 0.0);
  return p;
}

RobotPose RobotPose::rest() {
  auto p = zero();
  p.set(JointId::TorsoLift, kOperatingTorsoLift);
  return p;
}

JointLimits default_limits() {
  JointLimits lim;
  for (auto j : kAllJoints) lim.range[index_of(j)] = {-2.5, 2.5};
  lim.range[index_of(JointId::HeadYaw)] = {-1.3, 1.3};
  lim.range[index_of(JointId::TorsoLift)] = {0.0, 0.35};
  lim.max_speed = 1.0;
  return lim;
}

RobotPose clamp_pose(const RobotPose& pose, const JointLimits& limits) {
  RobotPose out = pose;
  for (auto j : kAllJoints) {
    if (auto v = pose.get(j)) out.set(j, std::clamp(*v, limits[j].min, limits[j].max));
  }
  return out;
}

RobotPose merge_partial(const RobotPose& base, const RobotPose& partial) {
  RobotPose out = base;
  for (auto j : kAllJoints) {
    if (auto v = partial.get(j)) out.set(j, *v);
  }
  return out;
}

RobotPose mirror_pose(const RobotPose& pose) {
  RobotPose out;
  for (std::size_t k = 0; k < kArmJointCount; ++k) {
    const auto role = static_cast<ArmJoint>(k);
    const double sign = role == ArmJoint::Shoulder ? -1.0 : 1.0;
    const auto left = arm_joint(Side::Left, role);
    const auto right = arm_joint(Side::Right, role);
    if (auto v = pose.get(right)) out.set(left, sign * *v);
    if (auto v = pose.get(left)) out.set(right, sign * *v);
  }
  if (auto v = pose.get(JointId::HeadYaw)) out.set(JointId::HeadYaw, -*v);
  if (auto v = pose.get(JointId::TorsoLift)) out.set(JointId::TorsoLift, *v);
  return out;
}

double motion_duration(const RobotPose& from, const RobotPose& to, double speed) {
  require_positive(speed, "joint speed");
  double longest = 0.0;
  for (auto j : kAllJoints) {
    if (!is_rotary(j)) continue;
    longest = std::max(longest, std::abs(to[j] - from[j]));
  }
  return longest / speed;
}

InterpolationStep interpolate(const RobotPose& current, const RobotPose& target, double speed,
                              double dt) {
  require_positive(speed, "joint speed");
  require_positive(dt, "time step");
  const double max_move = speed * dt;

  InterpolationStep step;
  step.done = true;
  for (auto j : kAllJoints) {
    const double goal = target[j];
    if (!is_rotary(j)) {
      step.pose.set(j, goal);
      continue;
    }
    const double gap = goal - current[j];
    double next = 0.0;
    if (std::abs(gap) <= max_move) {
      next = goal;
    } else {
      next = current[j] + std::copysign(max_move, gap);
    }
    if (std::abs(goal - next) > kDoneTolerance) step.done = false;
    step.pose.set(j, next);
  }
  return step;
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

PoseFrame forward_kinematics(const RobotPose& pose, const LinkModel& links) {
  PoseFrame frame;
  frame.torso_top = links.trunk_base_height + pose[JointId::TorsoLift];
  frame.head_yaw = pose[JointId::HeadYaw];
  frame.head_center = {0.0, frame.torso_top + links.head_radius};
  frame.left = arm_chain(pose, Side::Left, links, frame.torso_top);
  frame.right = arm_chain(pose, Side::Right, links, frame.torso_top);
  return frame;
}

}  // namespace trafwarden
