#pragma once

#include <Eigen/Dense>
#include <vector>

namespace banditservo
{
// Free-floating 6-DOF gripper pose. Twists are expressed in world frame
// (v, omega about world axes at the gripper origin).
struct GripperPose
{
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct GripperTwist
{
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
};

// Stacked gripper twists, one per gripper. The stacked vector layout is
// [v_0; omega_0; v_1; omega_1; ...].
struct RobotCommand
{
  std::vector<GripperTwist> twists;

  RobotCommand() = default;
  explicit RobotCommand(size_t grippers) : twists(grippers) {}

  size_t grippers() const { return twists.size(); }

  Eigen::VectorXd stacked() const;
  static RobotCommand fromStacked(const Eigen::VectorXd& q);

  // Plain Euclidean norm of the stacked vector.
  double norm() const;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& x);

bool isValidRotation(const Eigen::Matrix3d& rotation, double tol = 1e-9);

// Integrate a twist over unit time: translation moves by v, rotation by the
// exponential of omega.
GripperPose integrateTwist(const GripperPose& pose, const GripperTwist& twist);

// <a, b> = v_a . v_b + c * omega_a . omega_b, with c >= 0 trading off
// rotational against translational motion.
double twist_inner_product(const GripperTwist& a, const GripperTwist& b, double c);

// Sum of twist_inner_product over grippers. Throws std::invalid_argument on
// mismatched gripper counts.
double command_inner_product(const RobotCommand& a, const RobotCommand& b, double c);

double command_norm(const RobotCommand& a, double c);

// Velocity of a point rigidly attached to the gripper body:
// pdot = [I | -skew(point - pose.translation)] * [v; omega]
Eigen::Matrix<double, 3, 6> rigid_point_jacobian(const GripperPose& pose,
                                                 const Eigen::Vector3d& point);
}
