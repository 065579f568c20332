#pragma once

#include <string>
#include <vector>

#include "banditservo/controller.hpp"
#include "banditservo/models.hpp"
#include "banditservo/object.hpp"

namespace banditservo
{
// Deterministic kinematic environment: a chain of points whose true motion
// follows a hidden diminishing-rigidity Jacobian. Each step applies
// pdot = J_true qdot exactly and then re-derives J_true at the new state
// (unless frozen). Copyable, so counterfactual rollouts are cheap.
class ToyWorld final : public World
{
public:
  ToyWorld(SceneState scene, TargetSet targets, std::vector<Obstacle> obstacles,
           GeodesicDistanceMatrix distances, DiminishingRigidityParams true_params);

  const SceneState& scene() const override { return scene_; }
  const TargetSet& targets() const override { return targets_; }
  const std::vector<Obstacle>& obstacles() const override { return obstacles_; }
  const GeodesicDistanceMatrix& distances() const override { return distances_; }

  // Throws std::invalid_argument on a gripper-count mismatch or a non-finite
  // command.
  void execute(const RobotCommand& command) override;

  // Linearity probe mode: keep J_true fixed across steps. Unfreezing
  // re-derives it at the current state.
  void setJacobianFrozen(bool frozen);
  bool jacobianFrozen() const { return frozen_; }

  const Eigen::MatrixXd& trueJacobian() const { return J_true_; }
  const DiminishingRigidityParams& trueParams() const { return true_params_; }

private:
  void refreshJacobian();

  SceneState scene_;
  TargetSet targets_;
  std::vector<Obstacle> obstacles_;
  GeodesicDistanceMatrix distances_;
  DiminishingRigidityParams true_params_;
  Eigen::MatrixXd J_true_;
  bool frozen_ = false;
};

// Scenarios (all built on a 20-point chain, relaxed spacing 0.025 m, hidden
// true rigidity (10, 10) while the standard model grid is {0, 4, ..., 24}):
//   line-to-arc          one gripper bends a straight chain into an arc
//                        (targets produced by a scripted rollout, so they are
//                        exactly reachable)
//   chain-spread         two grippers stretch a compressed chain out to
//                        near-relaxed spacing above a floor plane
//   chain-around-obstacle  two grippers carry the chain sideways past a
//                        sphere sitting between start and targets
// Throws std::invalid_argument on an unknown name.
ToyWorld make_toy_world(const std::string& scenario);

// Reward command would earn from the current state, without touching world.
double counterfactual_reward(const ToyWorld& world, const RobotCommand& command);
}
