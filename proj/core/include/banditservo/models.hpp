#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "banditservo/object.hpp"
#include "banditservo/solver.hpp"

namespace banditservo
{
struct GeodesicDistanceMatrix
{
  Eigen::MatrixXd D;
};

struct GraphEdge
{
  int a = 0;
  int b = 0;
  double length = 0.0;
};

// All-pairs shortest path distances on the relaxed-object graph (Dijkstra per
// source). Throws std::invalid_argument on a disconnected graph, naming the
// separated components.
GeodesicDistanceMatrix geodesic_distance_matrix(const std::vector<Eigen::Vector3d>& relaxed_points,
                                                const std::vector<GraphEdge>& edges);

struct DiminishingRigidityParams
{
  double k_trans = 0.0;
  double k_rot = 0.0;
};

// Stacked 3P x 6G Jacobian where point i's block for gripper g is the rigid
// Jacobian with its translational columns scaled by exp(-k_trans * D_ig) and
// rotational columns by exp(-k_rot * D_ig). D_ig is the relaxed geodesic
// distance from point i to the nearest point grasped by gripper g.
Eigen::MatrixXd diminishing_rigidity_jacobian(const DiminishingRigidityParams& params,
                                              const GeodesicDistanceMatrix& D,
                                              const std::vector<GripperPose>& robot,
                                              const std::vector<std::vector<int>>& grasped,
                                              const ObjectState& points);

struct AdaptiveJacobianState
{
  Eigen::MatrixXd J_tilde;
  double learning_rate = 1.0;
};

struct BroydenUpdateResult
{
  AdaptiveJacobianState state;
  bool updated = false;
};

// Rank-one secant update
//   J~ += learning_rate * (pdot - J~ qdot) qdot^T / (qdot^T qdot).
// Commands with squared norm below eps_command are skipped (state returned
// unchanged, updated = false) to guard the denominator once a task converges.
BroydenUpdateResult broyden_update(const AdaptiveJacobianState& state,
                                   const Eigen::VectorXd& qdot,
                                   const Eigen::VectorXd& pdot_observed,
                                   double eps_command = 1e-12);

// A Jacobian-based deformation model: phi predicts point motion for a
// command, psi generates the command that best tracks a desired motion. The
// caller refreshes the scene once per control step; observe feeds back the
// executed step so adaptive models can learn. Instances are owned by a single
// trial (setScene/observe mutate).
class DeformationModel
{
public:
  virtual ~DeformationModel() = default;

  virtual void setScene(const SceneState& scene) { (void)scene; }

  virtual const Eigen::MatrixXd& jacobian() const = 0;

  // phi(qdot)
  virtual Eigen::VectorXd predict(const Eigen::VectorXd& qdot) const
  {
    return jacobian() * qdot;
  }

  // psi(desired, weights) subject to ||qdot|| <= max_norm
  virtual Eigen::VectorXd command(const Eigen::VectorXd& desired,
                                  const Eigen::VectorXd& weights,
                                  double max_norm) const
  {
    return solve_ball_constrained_wls({jacobian(), desired, weights, max_norm});
  }

  virtual void observe(const Eigen::VectorXd& qdot_executed,
                       const Eigen::VectorXd& pdot_observed)
  {
    (void)qdot_executed;
    (void)pdot_observed;
  }
};

class ConstantJacobianModel final : public DeformationModel
{
public:
  explicit ConstantJacobianModel(Eigen::MatrixXd J);

  const Eigen::MatrixXd& jacobian() const override { return J_; }

  // Reuses a cached factorization while the weight vector stays the same;
  // identical results to the uncached path by construction.
  Eigen::VectorXd command(const Eigen::VectorXd& desired,
                          const Eigen::VectorXd& weights,
                          double max_norm) const override;

private:
  Eigen::MatrixXd J_;
  mutable Eigen::VectorXd cached_weights_;
  mutable std::optional<BallConstrainedWlsFactorization> cached_factorization_;
};

class DiminishingRigidityModel final : public DeformationModel
{
public:
  DiminishingRigidityModel(DiminishingRigidityParams params,
                           std::shared_ptr<const GeodesicDistanceMatrix> distances);

  void setScene(const SceneState& scene) override;
  const Eigen::MatrixXd& jacobian() const override;

  const DiminishingRigidityParams& params() const { return params_; }

private:
  DiminishingRigidityParams params_;
  std::shared_ptr<const GeodesicDistanceMatrix> distances_;
  Eigen::MatrixXd J_;
};

class AdaptiveJacobianModel final : public DeformationModel
{
public:
  AdaptiveJacobianModel(AdaptiveJacobianState initial_state);

  const Eigen::MatrixXd& jacobian() const override { return state_.J_tilde; }

  void observe(const Eigen::VectorXd& qdot_executed,
               const Eigen::VectorXd& pdot_observed) override;

  const AdaptiveJacobianState& state() const { return state_; }

private:
  AdaptiveJacobianState state_;
};

// Parameters for the standard model set. With the defaults this is the
// 49-model diminishing-rigidity grid (k_trans, k_rot in {0, 4, ..., 24},
// row-major order) followed by 11 adaptive models (learning rates 1, 1e-1,
// ..., 1e-10, descending), each seeded from the diminishing-rigidity Jacobian
// with k = adaptive_seed_k at the initial scene. When constant_jacobians is
// non-empty those are wrapped instead (used by the synthetic experiments).
struct ModelSetConfig
{
  std::vector<double> k_trans_grid = {0, 4, 8, 12, 16, 20, 24};
  std::vector<double> k_rot_grid = {0, 4, 8, 12, 16, 20, 24};
  std::vector<double> adaptive_rates = {1e0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5,
                                        1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  double adaptive_seed_k = 10.0;
  GeodesicDistanceMatrix distances;
  SceneState initial_scene;

  std::vector<Eigen::MatrixXd> constant_jacobians;
};

// Builds the model set in a fixed, reproducible arm order. Throws
// std::invalid_argument when the config yields no models.
std::vector<std::unique_ptr<DeformationModel>> model_set_factory(const ModelSetConfig& config);
}
