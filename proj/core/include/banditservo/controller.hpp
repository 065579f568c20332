#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "banditservo/bandits.hpp"
#include "banditservo/lie.hpp"
#include "banditservo/models.hpp"
#include "banditservo/object.hpp"

namespace banditservo
{
// Per-point desired velocities (stacked, 3P) and importance weights (P).
struct DesiredMotion
{
  Eigen::VectorXd delta;
  Eigen::VectorXd weights;
};

struct Obstacle
{
  enum class Shape
  {
    sphere,
    plane
  };

  Shape shape = Shape::sphere;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // center (sphere) or any point (plane)
  double radius = 0.0;                                 // sphere only
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();   // plane only, outward

  // Throws std::invalid_argument on radius <= 0.
  static Obstacle sphere(const Eigen::Vector3d& center, double radius);
  // Normalizes the normal; throws std::invalid_argument on a zero vector.
  static Obstacle plane(const Eigen::Vector3d& point, const Eigen::Vector3d& outward_normal);
};

// Defaults are the table-coverage task values.
struct ControllerConfig
{
  double c = 0.0025;            // rotation weight in twist inner products
  double beta = 1000.0;         // obstacle repulsion falloff
  double lambda = 0.03;         // stretching threshold, meters
  double v_max_e = 0.2;         // task command norm bound
  double v_max_o = 0.2;         // repulsion command norm bound
  double gripper_radius = 0.01; // grippers are spheres for proximity checks

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

struct ProximityResult
{
  Eigen::Matrix<double, 3, 6> jacobian;  // rigid point Jacobian at the closest gripper point
  Eigen::Vector3d direction;             // unit vector, obstacle surface toward gripper
  double distance = 0.0;                 // surface-to-surface, clamped to >= 1e-6
};

// Minimal interface the control loop needs from an environment. A trial owns
// its world; execute advances one unit-time step and may throw, which aborts
// the trial.
class World
{
public:
  virtual ~World() = default;

  virtual const SceneState& scene() const = 0;
  virtual const TargetSet& targets() const = 0;
  virtual const std::vector<Obstacle>& obstacles() const = 0;
  virtual const GeodesicDistanceMatrix& distances() const = 0;

  virtual void execute(const RobotCommand& command) = 0;
};

// rho: sum over targets of the distance to the nearest object point.
double task_error(const ObjectState& points, const TargetSet& targets);

// Each target pulls its nearest object point (lowest index on ties). Pulls
// accumulate; the weight of a point is the largest distance among the targets
// assigned to it.
DesiredMotion error_correction(const ObjectState& points, const TargetSet& targets);

// Any pair stretched more than lambda beyond its relaxed (geodesic) distance
// gets a pairwise contraction split evenly between the endpoints.
DesiredMotion stretching_correction(const GeodesicDistanceMatrix& distances, double lambda,
                                    const ObjectState& points);

// Stretching takes priority: the error term keeps only its component
// orthogonal to the per-point stretching direction. Weights add.
DesiredMotion combine_terms(const DesiredMotion& error, const DesiredMotion& stretching);

// Closest pair between a spherical gripper and any obstacle. Penetration
// clamps the distance to 1e-6 with the direction taken from the obstacle's
// outward normal. Throws std::invalid_argument on an empty obstacle list.
ProximityResult proximity(const GripperPose& gripper, double gripper_radius,
                          const std::vector<Obstacle>& obstacles);

// Per-gripper blend between collision avoidance and the desired command,
// gamma = exp(-beta d). The avoidance part moves the closest gripper point
// directly away from the obstacle at v_max_o and the desired command is
// projected into its nullspace. Empty obstacle list returns the input.
RobotCommand obstacle_repulsion(const RobotCommand& desired, const std::vector<Obstacle>& obstacles,
                                const std::vector<GripperPose>& grippers, double beta,
                                double v_max_o, double gripper_radius);

struct StepRecord
{
  int arm = 0;
  double reward = 0.0;
  double error_before = 0.0;
  double error_after = 0.0;
  double eta = 0.0;  // post-annealing value
  RobotCommand executed;
  // Pre-repulsion task commands: one per model (arm-indexed) when the
  // selector needs the similarity matrix, otherwise just the chosen arm's.
  std::vector<RobotCommand> proposals;
  bool aborted = false;
  std::string diagnostic;
};

// One control-loop iteration: sense, pick a model, build the desired motion,
// solve for the command, apply obstacle repulsion, execute, and feed the
// reward back to the selector and the adaptive models.
StepRecord main_loop_step(World& world,
                          const std::vector<std::unique_ptr<DeformationModel>>& models,
                          ArmSelector& selector, std::mt19937_64& rng,
                          const ControllerConfig& config);
}
