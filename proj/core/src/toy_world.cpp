#include "banditservo/toy_world.hpp"

#include <stdexcept>
#include <utility>

namespace banditservo
{
ToyWorld::ToyWorld(SceneState scene, TargetSet targets, std::vector<Obstacle> obstacles,
                   GeodesicDistanceMatrix distances, DiminishingRigidityParams true_params)
  : scene_(std::move(scene)),
    targets_(std::move(targets)),
    obstacles_(std::move(obstacles)),
    distances_(std::move(distances)),
    true_params_(true_params)
{
  if (scene_.grippers.empty() || scene_.grippers.size() != scene_.grasped.size())
  {
    throw std::invalid_argument("ToyWorld: need one grasped-point list per gripper");
  }
  refreshJacobian();
}

void ToyWorld::execute(const RobotCommand& command)
{
  if (command.grippers() != scene_.grippers.size())
  {
    throw std::invalid_argument("ToyWorld::execute: gripper count mismatch");
  }
  const Eigen::VectorXd qdot = command.stacked();
  if (!qdot.allFinite())
  {
    throw std::invalid_argument("ToyWorld::execute: non-finite command");
  }

  const Eigen::VectorXd pdot = J_true_ * qdot;
  scene_.object.points +=
      Eigen::Map<const Eigen::Matrix3Xd>(pdot.data(), 3, scene_.object.count());
  for (size_t g = 0; g < scene_.grippers.size(); g++)
  {
    scene_.grippers[g] = integrateTwist(scene_.grippers[g], command.twists[g]);
  }
  if (!frozen_)
  {
    refreshJacobian();
  }
}

void ToyWorld::setJacobianFrozen(bool frozen)
{
  frozen_ = frozen;
  if (!frozen_)
  {
    refreshJacobian();
  }
}

void ToyWorld::refreshJacobian()
{
  J_true_ = diminishing_rigidity_jacobian(true_params_, distances_, scene_.grippers,
                                          scene_.grasped, scene_.object);
}

namespace
{
constexpr int kChainPoints = 20;
constexpr double kRelaxedSpacing = 0.025;
const DiminishingRigidityParams kTrueParams{10.0, 10.0};

GeodesicDistanceMatrix chainDistances()
{
  std::vector<Eigen::Vector3d> relaxed(kChainPoints);
  std::vector<GraphEdge> edges;
  edges.reserve(kChainPoints - 1);
  for (int i = 0; i < kChainPoints; i++)
  {
    relaxed[i] = Eigen::Vector3d(kRelaxedSpacing * i, 0.0, 0.0);
    if (i + 1 < kChainPoints)
    {
      edges.push_back({i, i + 1, kRelaxedSpacing});
    }
  }
  return geodesic_distance_matrix(relaxed, edges);
}

SceneState chainScene(double spacing, double height, const std::vector<int>& grasp_points)
{
  SceneState scene;
  scene.object.points.resize(3, kChainPoints);
  for (int i = 0; i < kChainPoints; i++)
  {
    scene.object.points.col(i) = Eigen::Vector3d(spacing * i, 0.0, height);
  }
  for (const int point : grasp_points)
  {
    GripperPose pose;
    pose.translation = scene.object.points.col(point);
    scene.grippers.push_back(pose);
    scene.grasped.push_back({point});
  }
  return scene;
}

ToyWorld makeLineToArc()
{
  const SceneState scene = chainScene(kRelaxedSpacing, 0.2, {0});

  // Targets come from rolling the true dynamics under a fixed twist, so a
  // command sequence reaching them exactly is known to exist.
  ToyWorld rollout(scene, TargetSet{scene.object.points}, {}, chainDistances(), kTrueParams);
  RobotCommand sweep(1);
  sweep.twists[0].v = Eigen::Vector3d(0.0, 0.0015, 0.0);
  sweep.twists[0].omega = Eigen::Vector3d(0.0, 0.0, 0.008);
  for (int step = 0; step < 125; step++)
  {
    rollout.execute(sweep);
  }

  return ToyWorld(scene, TargetSet{rollout.scene().object.points}, {}, chainDistances(),
                  kTrueParams);
}

ToyWorld makeChainSpread()
{
  const double compressed = 0.0125;
  const SceneState scene = chainScene(compressed, 0.1, {0, kChainPoints - 1});

  // Same trick as line-to-arc: pull both ends outward under the true
  // dynamics and use the rolled-out state as the target, so the spread
  // configuration is exactly reachable. The sweep length keeps every
  // neighbor gap under the relaxed spacing plus lambda.
  ToyWorld rollout(scene, TargetSet{scene.object.points}, {}, chainDistances(), kTrueParams);
  RobotCommand sweep(2);
  sweep.twists[0].v = Eigen::Vector3d(-0.00075, 0.0, 0.0);
  sweep.twists[1].v = Eigen::Vector3d(0.00075, 0.0, 0.0);
  for (int step = 0; step < 150; step++)
  {
    rollout.execute(sweep);
  }

  std::vector<Obstacle> obstacles = {
      Obstacle::plane(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ())};
  return ToyWorld(scene, TargetSet{rollout.scene().object.points}, std::move(obstacles),
                  chainDistances(), kTrueParams);
}

ToyWorld makeChainAroundObstacle()
{
  const SceneState scene = chainScene(kRelaxedSpacing, 0.1, {0, kChainPoints - 1});

  TargetSet targets;
  targets.targets = scene.object.points;
  targets.targets.row(1).array() += 0.1;

  const double mid_x = kRelaxedSpacing * (kChainPoints - 1) / 2.0;
  std::vector<Obstacle> obstacles = {
      Obstacle::sphere(Eigen::Vector3d(mid_x, 0.05, 0.1), 0.03),
      Obstacle::plane(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ())};
  return ToyWorld(scene, targets, std::move(obstacles), chainDistances(), kTrueParams);
}
}

ToyWorld make_toy_world(const std::string& scenario)
{
  if (scenario == "line-to-arc")
  {
    return makeLineToArc();
  }
  if (scenario == "chain-spread")
  {
    return makeChainSpread();
  }
  if (scenario == "chain-around-obstacle")
  {
    return makeChainAroundObstacle();
  }
  throw std::invalid_argument(
      "unknown scenario: " + scenario +
      " (expected line-to-arc, chain-spread, or chain-around-obstacle)");
}

double counterfactual_reward(const ToyWorld& world, const RobotCommand& command)
{
  ToyWorld copy = world;
  const double error_before = task_error(copy.scene().object, copy.targets());
  copy.execute(command);
  return error_before - task_error(copy.scene().object, copy.targets());
}
}
