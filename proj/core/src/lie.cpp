#include "banditservo/lie.hpp"

#include <cassert>
#include <stdexcept>

namespace banditservo
{
Eigen::VectorXd RobotCommand::stacked() const
{
  Eigen::VectorXd q(6 * twists.size());
  for (size_t g = 0; g < twists.size(); g++)
  {
    q.segment<3>(6 * g) = twists[g].v;
    q.segment<3>(6 * g + 3) = twists[g].omega;
  }
  return q;
}

RobotCommand RobotCommand::fromStacked(const Eigen::VectorXd& q)
{
  assert(q.size() % 6 == 0);
  RobotCommand cmd(static_cast<size_t>(q.size() / 6));
  for (size_t g = 0; g < cmd.twists.size(); g++)
  {
    cmd.twists[g].v = q.segment<3>(6 * static_cast<Eigen::Index>(g));
    cmd.twists[g].omega = q.segment<3>(6 * static_cast<Eigen::Index>(g) + 3);
  }
  return cmd;
}

double RobotCommand::norm() const
{
  double sq = 0.0;
  for (const auto& twist : twists)
  {
    sq += twist.v.squaredNorm() + twist.omega.squaredNorm();
  }
  return std::sqrt(sq);
}

Eigen::Matrix3d skew(const Eigen::Vector3d& x)
{
  Eigen::Matrix3d s;
  s <<     0, -x(2),  x(1),
        x(2),     0, -x(0),
       -x(1),  x(0),     0;
  return s;
}

bool isValidRotation(const Eigen::Matrix3d& rotation, double tol)
{
  const double orthonormality =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return orthonormality <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

GripperPose integrateTwist(const GripperPose& pose, const GripperTwist& twist)
{
  GripperPose next;
  next.translation = pose.translation + twist.v;
  const double angle = twist.omega.norm();
  if (angle > 0.0)
  {
    next.rotation = Eigen::AngleAxisd(angle, twist.omega / angle).toRotationMatrix() * pose.rotation;
  }
  else
  {
    next.rotation = pose.rotation;
  }
  return next;
}

double twist_inner_product(const GripperTwist& a, const GripperTwist& b, double c)
{
  assert(c >= 0.0);
  return a.v.dot(b.v) + c * a.omega.dot(b.omega);
}

double command_inner_product(const RobotCommand& a, const RobotCommand& b, double c)
{
  if (a.grippers() != b.grippers())
  {
    throw std::invalid_argument("command_inner_product: commands have different gripper counts");
  }
  double total = 0.0;
  for (size_t g = 0; g < a.grippers(); g++)
  {
    total += twist_inner_product(a.twists[g], b.twists[g], c);
  }
  return total;
}

double command_norm(const RobotCommand& a, double c)
{
  return std::sqrt(command_inner_product(a, a, c));
}

Eigen::Matrix<double, 3, 6> rigid_point_jacobian(const GripperPose& pose,
                                                 const Eigen::Vector3d& point)
{
  Eigen::Matrix<double, 3, 6> jacobian;
  jacobian.leftCols<3>() = Eigen::Matrix3d::Identity();
  jacobian.rightCols<3>() = -skew(point - pose.translation);
  return jacobian;
}
}
