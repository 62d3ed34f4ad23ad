#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace trafwarden {

// Joint order follows the controller device indices: arm_<side>_1..6_joint,
// then torso_lift_joint and head_1_joint.
enum class JointId : std::uint8_t {
  LeftShoulder,
  LeftHalfArm,
  LeftMidArm,
  LeftArm,
  LeftHalfHand,
  LeftHand,
  RightShoulder,
  RightHalfArm,
  RightMidArm,
  RightArm,
  RightHalfHand,
  RightHand,
  TorsoLift,
  HeadYaw,
};

inline constexpr std::size_t kJointCount = 14;

enum class Side : std::uint8_t { Left, Right };

// Role of a joint within one arm; the numeric value is the device index - 1.
enum class ArmJoint : std::uint8_t { Shoulder, HalfArm, MidArm, Arm, HalfHand, Hand };

inline constexpr std::size_t kArmJointCount = 6;

constexpr JointId arm_joint(Side side, ArmJoint role) {
  const auto base = side == Side::Left ? 0U : kArmJointCount;
  return static_cast<JointId>(base + static_cast<std::size_t>(role));
}

constexpr std::size_t index_of(JointId j) { return static_cast<std::size_t>(j); }

inline constexpr std::array<JointId, kJointCount> kAllJoints = {
    JointId::LeftShoulder,  JointId::LeftHalfArm,  JointId::LeftMidArm,    JointId::LeftArm,
    JointId::LeftHalfHand,  JointId::LeftHand,     JointId::RightShoulder, JointId::RightHalfArm,
    JointId::RightMidArm,   JointId::RightArm,     JointId::RightHalfHand, JointId::RightHand,
    JointId::TorsoLift,     JointId::HeadYaw,
};

/// Robot device name, e.g. "arm_left_2_joint".
std::string_view device_name(JointId j);
/// Snake-case role name used on the wire, e.g. "left_half_arm".
std::string_view joint_name(JointId j);
std::optional<JointId> joint_from_name(std::string_view name);

// Torso height the robot holds after start-up.
inline constexpr double kOperatingTorsoLift = 0.35;

/// Angles in radians, torso lift in meters. A pose may be partial: only the
/// assigned joints carry meaning.
class RobotPose {
 public:
  RobotPose() = default;

  /// Every joint assigned, all zero.
  static RobotPose zero();
  /// Arms and head at zero with the torso raised to the operating height.
  static RobotPose rest();

  void set(JointId j, double value) {
    values_[index_of(j)] = value;
    assigned_.set(index_of(j));
  }
  void unset(JointId j) {
    values_[index_of(j)] = 0.0;
    assigned_.reset(index_of(j));
  }
  bool has(JointId j) const { return assigned_.test(index_of(j)); }
  std::optional<double> get(JointId j) const {
    if (!has(j)) return std::nullopt;
    return values_[index_of(j)];
  }
  // Unassigned joints read as 0.
  double operator[](JointId j) const { return values_[index_of(j)]; }

  bool is_full() const { return assigned_.all(); }
  bool empty() const { return assigned_.none(); }
  std::size_t assigned_count() const { return assigned_.count(); }

  friend bool operator==(const RobotPose&, const RobotPose&) = default;

 private:
  std::array<double, kJointCount> values_{};
  std::bitset<kJointCount> assigned_;
};

struct JointRange {
  double min = 0.0;
  double max = 0.0;
  bool contains(double v) const { return v >= min && v <= max; }
};

struct JointLimits {
  std::array<JointRange, kJointCount> range{};
  double max_speed = 1.0;  // rad/s

  const JointRange& operator[](JointId j) const { return range[index_of(j)]; }
  bool contains(JointId j, double v) const { return (*this)[j].contains(v); }
};

JointLimits default_limits();

/// Clamps assigned joints into their ranges. Unassigned joints stay unassigned.
RobotPose clamp_pose(const RobotPose& pose, const JointLimits& limits);

/// `base` with every joint assigned in `partial` overwritten.
RobotPose merge_partial(const RobotPose& base, const RobotPose& partial);

/// Swaps left and right arms. Shoulder abduction and head yaw change sign;
/// the remaining arm joints keep theirs.
RobotPose mirror_pose(const RobotPose& pose);

/// Time for constant-rate motion to reach `to`: max |delta| / speed over the
/// rotary joints. Torso lift is excluded. Throws std::invalid_argument when
/// speed <= 0.
double motion_duration(const RobotPose& from, const RobotPose& to, double speed);

inline constexpr double kDoneTolerance = 1e-6;

struct InterpolationStep {
  RobotPose pose;
  bool done = false;
};

/// Moves every rotary joint toward the target by at most speed * dt without
/// overshoot. Torso lift snaps to its target. Throws std::invalid_argument
/// for non-positive speed or dt.
InterpolationStep interpolate(const RobotPose& current, const RobotPose& target, double speed,
                              double dt);

struct LinkModel {
  double shoulder_width = 0.40;
  double upper_arm = 0.30;
  double forearm = 0.30;
  double hand = 0.15;
  double trunk_base_height = 0.80;
  double trunk_lift_range = 0.35;
  double head_radius = 0.15;

  double standing_height(double lift) const { return trunk_base_height + lift + 2.0 * head_radius; }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

struct ArmFrame {
  Point2 shoulder;
  Point2 elbow;
  Point2 wrist;
  Point2 fingertip;
};

// Frontal plane of the robot: x points to the robot's left, y up from the
// floor, the trunk axis is x = 0.
struct PoseFrame {
  ArmFrame left;
  ArmFrame right;
  Point2 head_center;
  double head_yaw = 0.0;
  double torso_top = 0.0;
};

/// Frontal-plane projection of both arms.
///
/// Per arm, with s = +1 for the left arm and -1 for the right:
///   upper-arm elevation  = s * shoulder - half_arm
///   forearm direction    = elevation + arm
///   hand direction       = forearm direction + half_hand
/// measured from the outward horizontal, positive upward. mid_arm and hand
/// are axial rolls and do not move frontal-plane points.
PoseFrame forward_kinematics(const RobotPose& pose, const LinkModel& links = {});

}  // namespace trafwarden
