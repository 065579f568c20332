#include "banditservo/controller.hpp"

#include <cassert>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

namespace banditservo
{
Obstacle Obstacle::sphere(const Eigen::Vector3d& center, double radius)
{
  if (radius <= 0.0)
  {
    throw std::invalid_argument("Obstacle::sphere: radius must be positive");
  }
  Obstacle obstacle;
  obstacle.shape = Shape::sphere;
  obstacle.position = center;
  obstacle.radius = radius;
  return obstacle;
}

Obstacle Obstacle::plane(const Eigen::Vector3d& point, const Eigen::Vector3d& outward_normal)
{
  const double norm = outward_normal.norm();
  if (norm < 1e-12)
  {
    throw std::invalid_argument("Obstacle::plane: normal must be nonzero");
  }
  Obstacle obstacle;
  obstacle.shape = Shape::plane;
  obstacle.position = point;
  obstacle.normal = outward_normal / norm;
  return obstacle;
}

double task_error(const ObjectState& points, const TargetSet& targets)
{
  assert(points.count() >= 1 && targets.count() >= 1);
  double error = 0.0;
  for (Eigen::Index i = 0; i < targets.count(); i++)
  {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < points.count(); k++)
    {
      nearest = std::min(nearest, (targets.targets.col(i) - points.points.col(k)).norm());
    }
    error += nearest;
  }
  return error;
}

DesiredMotion error_correction(const ObjectState& points, const TargetSet& targets)
{
  const Eigen::Index P = points.count();
  DesiredMotion motion;
  motion.delta = Eigen::VectorXd::Zero(3 * P);
  motion.weights = Eigen::VectorXd::Zero(P);

  for (Eigen::Index i = 0; i < targets.count(); i++)
  {
    Eigen::Index nearest = 0;
    double nearest_distance = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < P; k++)
    {
      const double distance = (targets.targets.col(i) - points.points.col(k)).norm();
      if (distance < nearest_distance)
      {
        nearest_distance = distance;
        nearest = k;
      }
    }
    motion.delta.segment<3>(3 * nearest) += targets.targets.col(i) - points.points.col(nearest);
    motion.weights(nearest) = std::max(motion.weights(nearest), nearest_distance);
  }
  return motion;
}

DesiredMotion stretching_correction(const GeodesicDistanceMatrix& distances, double lambda,
                                    const ObjectState& points)
{
  assert(lambda >= 0.0);
  const Eigen::Index P = points.count();
  assert(distances.D.rows() == P && distances.D.cols() == P);

  DesiredMotion motion;
  motion.delta = Eigen::VectorXd::Zero(3 * P);
  motion.weights = Eigen::VectorXd::Zero(P);

  for (Eigen::Index i = 0; i < P; i++)
  {
    for (Eigen::Index j = i + 1; j < P; j++)
    {
      const Eigen::Vector3d separation = points.points.col(j) - points.points.col(i);
      const double overstretch = separation.norm() - distances.D(i, j);
      if (overstretch > lambda)
      {
        const Eigen::Vector3d contraction = overstretch * separation;
        motion.delta.segment<3>(3 * i) += 0.5 * contraction;
        motion.delta.segment<3>(3 * j) -= 0.5 * contraction;
        motion.weights(i) = std::max(motion.weights(i), overstretch);
        motion.weights(j) = std::max(motion.weights(j), overstretch);
      }
    }
  }
  return motion;
}

DesiredMotion combine_terms(const DesiredMotion& error, const DesiredMotion& stretching)
{
  const Eigen::Index P = error.weights.size();
  assert(stretching.weights.size() == P);
  assert(error.delta.size() == 3 * P && stretching.delta.size() == 3 * P);

  DesiredMotion combined;
  combined.delta = Eigen::VectorXd::Zero(3 * P);
  combined.weights = error.weights + stretching.weights;

  for (Eigen::Index i = 0; i < P; i++)
  {
    const Eigen::Vector3d s = stretching.delta.segment<3>(3 * i);
    const Eigen::Vector3d e = error.delta.segment<3>(3 * i);
    const double s2 = s.squaredNorm();
    // Projection onto a zero stretching direction is defined as zero.
    const Eigen::Vector3d projection = s2 > 0.0 ? Eigen::Vector3d(e.dot(s) / s2 * s)
                                                : Eigen::Vector3d::Zero();
    combined.delta.segment<3>(3 * i) = s + e - projection;
  }
  return combined;
}

namespace
{
struct ClosestPair
{
  double signed_distance;        // surface to surface, negative inside
  Eigen::Vector3d outward;       // obstacle outward normal at the closest point
  Eigen::Vector3d gripper_point; // closest point on the gripper sphere
};

ClosestPair closestPair(const GripperPose& gripper, double gripper_radius,
                        const Obstacle& obstacle)
{
  const Eigen::Vector3d& x = gripper.translation;
  ClosestPair pair;
  if (obstacle.shape == Obstacle::Shape::sphere)
  {
    const Eigen::Vector3d relative = x - obstacle.position;
    const double center_distance = relative.norm();
    pair.outward =
        center_distance > 1e-12 ? Eigen::Vector3d(relative / center_distance)
                                : Eigen::Vector3d::UnitZ();
    pair.signed_distance = center_distance - obstacle.radius - gripper_radius;
  }
  else
  {
    pair.outward = obstacle.normal;
    pair.signed_distance = (x - obstacle.position).dot(obstacle.normal) - gripper_radius;
  }
  pair.gripper_point = x - gripper_radius * pair.outward;
  return pair;
}
}

ProximityResult proximity(const GripperPose& gripper, double gripper_radius,
                          const std::vector<Obstacle>& obstacles)
{
  if (obstacles.empty())
  {
    throw std::invalid_argument("proximity: obstacle list is empty");
  }

  ClosestPair best = closestPair(gripper, gripper_radius, obstacles[0]);
  for (size_t o = 1; o < obstacles.size(); o++)
  {
    const ClosestPair pair = closestPair(gripper, gripper_radius, obstacles[o]);
    if (pair.signed_distance < best.signed_distance)
    {
      best = pair;
    }
  }

  ProximityResult result;
  // Positive separation: the gripper-to-obstacle direction coincides with the
  // outward normal for both shapes. Penetration keeps the normal and clamps.
  result.direction = best.outward;
  result.distance = std::max(best.signed_distance, 1e-6);
  result.jacobian = rigid_point_jacobian(gripper, best.gripper_point);
  return result;
}

RobotCommand obstacle_repulsion(const RobotCommand& desired, const std::vector<Obstacle>& obstacles,
                                const std::vector<GripperPose>& grippers, double beta,
                                double v_max_o, double gripper_radius)
{
  assert(beta > 0.0 && v_max_o > 0.0);
  assert(desired.grippers() == grippers.size());
  if (obstacles.empty())
  {
    return desired;
  }

  RobotCommand command = desired;
  for (size_t g = 0; g < grippers.size(); g++)
  {
    const ProximityResult prox = proximity(grippers[g], gripper_radius, obstacles);
    const double gamma = std::exp(-beta * prox.distance);

    const Eigen::Matrix<double, 6, 3> pinv =
        prox.jacobian.completeOrthogonalDecomposition().pseudoInverse();

    Eigen::Matrix<double, 6, 1> avoid = pinv * prox.direction;
    const double avoid_norm = avoid.norm();
    if (avoid_norm > 1e-12)
    {
      avoid *= v_max_o / avoid_norm;
    }

    Eigen::Matrix<double, 6, 1> task;
    task << desired.twists[g].v, desired.twists[g].omega;
    const Eigen::Matrix<double, 6, 1> nullspace_task =
        task - pinv * (prox.jacobian * task);

    const Eigen::Matrix<double, 6, 1> blended =
        gamma * (avoid + nullspace_task) + (1.0 - gamma) * task;
    command.twists[g].v = blended.head<3>();
    command.twists[g].omega = blended.tail<3>();
  }
  return command;
}

StepRecord main_loop_step(World& world,
                          const std::vector<std::unique_ptr<DeformationModel>>& models,
                          ArmSelector& selector, std::mt19937_64& rng,
                          const ControllerConfig& config)
{
  assert(!models.empty());
  assert(static_cast<int>(models.size()) == selector.arms());

  const SceneState& scene = world.scene();
  const TargetSet& targets = world.targets();

  StepRecord record;
  record.error_before = task_error(scene.object, targets);

  const DesiredMotion error = error_correction(scene.object, targets);
  const DesiredMotion stretching =
      stretching_correction(world.distances(), config.lambda, scene.object);
  const DesiredMotion desired = combine_terms(error, stretching);

  for (const auto& model : models)
  {
    model->setScene(scene);
  }

  record.arm = selector.select(rng);

  RobotCommand chosen;
  Eigen::MatrixXd similarity;
  if (selector.needsSimilarity())
  {
    record.proposals.reserve(models.size());
    for (const auto& model : models)
    {
      record.proposals.push_back(RobotCommand::fromStacked(
          model->command(desired.delta, desired.weights, config.v_max_e)));
    }
    chosen = record.proposals[record.arm];
    similarity = command_similarity_matrix(record.proposals, config.c);
  }
  else
  {
    chosen = RobotCommand::fromStacked(
        models[record.arm]->command(desired.delta, desired.weights, config.v_max_e));
    record.proposals.push_back(chosen);
  }

  record.executed = obstacle_repulsion(chosen, world.obstacles(), scene.grippers, config.beta,
                                       config.v_max_o, config.gripper_radius);

  const Eigen::VectorXd points_before = scene.object.stacked();
  try
  {
    world.execute(record.executed);
  }
  catch (const std::exception& e)
  {
    record.aborted = true;
    record.diagnostic = e.what();
    record.error_after = record.error_before;
    record.eta = selector.eta();
    return record;
  }

  record.error_after = task_error(world.scene().object, targets);
  record.reward = compute_reward(record.error_before, record.error_after);

  selector.observe({record.arm, record.reward},
                   selector.needsSimilarity() ? &similarity : nullptr);
  record.eta = selector.eta();

  const Eigen::VectorXd qdot = record.executed.stacked();
  const Eigen::VectorXd pdot = world.scene().object.stacked() - points_before;
  for (const auto& model : models)
  {
    model->observe(qdot, pdot);
  }
  return record;
}
}
