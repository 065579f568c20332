#pragma once

#include <Eigen/Dense>
#include <vector>

#include "banditservo/lie.hpp"

namespace banditservo
{
// Deformable object configuration: P tracked points. Columns are points, so
// the column-major data is already the stacked [p_0; p_1; ...] vector.
struct ObjectState
{
  Eigen::Matrix3Xd points;

  Eigen::Index count() const { return points.cols(); }

  Eigen::VectorXd stacked() const
  {
    return Eigen::Map<const Eigen::VectorXd>(points.data(), points.size());
  }
};

struct TargetSet
{
  Eigen::Matrix3Xd targets;

  Eigen::Index count() const { return targets.cols(); }
};

// Everything a deformation model may condition its Jacobian on: the gripper
// poses, which points each gripper holds, and the current object state.
struct SceneState
{
  std::vector<GripperPose> grippers;
  std::vector<std::vector<int>> grasped;
  ObjectState object;
};
}
