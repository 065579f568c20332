#include "banditservo/models.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace banditservo
{
GeodesicDistanceMatrix geodesic_distance_matrix(const std::vector<Eigen::Vector3d>& relaxed_points,
                                                const std::vector<GraphEdge>& edges)
{
  const int P = static_cast<int>(relaxed_points.size());
  if (P == 0)
  {
    throw std::invalid_argument("geodesic_distance_matrix: no points");
  }

  std::vector<std::vector<std::pair<int, double>>> adjacency(P);
  for (const auto& edge : edges)
  {
    if (edge.a < 0 || edge.a >= P || edge.b < 0 || edge.b >= P)
    {
      throw std::invalid_argument("geodesic_distance_matrix: edge index out of range");
    }
    if (!(edge.length >= 0.0))
    {
      throw std::invalid_argument("geodesic_distance_matrix: negative edge length");
    }
    adjacency[edge.a].emplace_back(edge.b, edge.length);
    adjacency[edge.b].emplace_back(edge.a, edge.length);
  }

  const double inf = std::numeric_limits<double>::infinity();
  GeodesicDistanceMatrix result;
  result.D.setConstant(P, P, inf);

  std::priority_queue<std::pair<double, int>,
                      std::vector<std::pair<double, int>>,
                      std::greater<>> queue;
  for (int source = 0; source < P; source++)
  {
    auto dist = result.D.row(source);
    dist(source) = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty())
    {
      const auto [d, node] = queue.top();
      queue.pop();
      if (d > dist(node))
      {
        continue;
      }
      for (const auto& [next, length] : adjacency[node])
      {
        const double candidate = d + length;
        if (candidate < dist(next))
        {
          dist(next) = candidate;
          queue.emplace(candidate, next);
        }
      }
    }
  }

  if (!result.D.allFinite())
  {
    // Name the components so a bad mesh is debuggable.
    std::vector<int> component(P, -1);
    int components = 0;
    for (int start = 0; start < P; start++)
    {
      if (component[start] >= 0)
      {
        continue;
      }
      std::vector<int> stack = {start};
      component[start] = components;
      while (!stack.empty())
      {
        const int node = stack.back();
        stack.pop_back();
        for (const auto& [next, length] : adjacency[node])
        {
          (void)length;
          if (component[next] < 0)
          {
            component[next] = components;
            stack.push_back(next);
          }
        }
      }
      components++;
    }
    std::ostringstream message;
    message << "geodesic_distance_matrix: graph has " << components << " components;"
            << " point 0 is in component 0, first point outside it: ";
    for (int i = 0; i < P; i++)
    {
      if (component[i] != 0)
      {
        message << i << " (component " << component[i] << ")";
        break;
      }
    }
    throw std::invalid_argument(message.str());
  }
  return result;
}

namespace
{
// D_ig: relaxed geodesic distance from point i to the nearest point held by
// gripper g.
double gripperPointDistance(const GeodesicDistanceMatrix& D,
                            const std::vector<int>& grasped,
                            Eigen::Index point)
{
  double best = std::numeric_limits<double>::infinity();
  for (const int g : grasped)
  {
    best = std::min(best, D.D(point, g));
  }
  return best;
}
}

Eigen::MatrixXd diminishing_rigidity_jacobian(const DiminishingRigidityParams& params,
                                              const GeodesicDistanceMatrix& D,
                                              const std::vector<GripperPose>& robot,
                                              const std::vector<std::vector<int>>& grasped,
                                              const ObjectState& points)
{
  assert(params.k_trans >= 0.0 && params.k_rot >= 0.0);
  if (robot.size() != grasped.size())
  {
    throw std::invalid_argument("diminishing_rigidity_jacobian: one grasped-point list per gripper");
  }
  const Eigen::Index P = points.count();
  const Eigen::Index G = static_cast<Eigen::Index>(robot.size());

  Eigen::MatrixXd J(3 * P, 6 * G);
  for (Eigen::Index g = 0; g < G; g++)
  {
    if (grasped[g].empty())
    {
      throw std::invalid_argument("diminishing_rigidity_jacobian: gripper grasps no points");
    }
    for (Eigen::Index i = 0; i < P; i++)
    {
      const double distance = gripperPointDistance(D, grasped[g], i);
      const double w_trans = std::exp(-params.k_trans * distance);
      const double w_rot = std::exp(-params.k_rot * distance);
      const Eigen::Matrix<double, 3, 6> rigid =
          rigid_point_jacobian(robot[g], points.points.col(i));
      J.block<3, 3>(3 * i, 6 * g) = w_trans * rigid.leftCols<3>();
      J.block<3, 3>(3 * i, 6 * g + 3) = w_rot * rigid.rightCols<3>();
    }
  }
  return J;
}

BroydenUpdateResult broyden_update(const AdaptiveJacobianState& state,
                                   const Eigen::VectorXd& qdot,
                                   const Eigen::VectorXd& pdot_observed,
                                   double eps_command)
{
  const double qdot_sq = qdot.squaredNorm();
  if (qdot_sq <= eps_command)
  {
    return {state, false};
  }
  BroydenUpdateResult result{state, true};
  const Eigen::VectorXd residual = pdot_observed - state.J_tilde * qdot;
  result.state.J_tilde.noalias() += (state.learning_rate / qdot_sq) * residual * qdot.transpose();
  return result;
}

ConstantJacobianModel::ConstantJacobianModel(Eigen::MatrixXd J) : J_(std::move(J)) {}

Eigen::VectorXd ConstantJacobianModel::command(const Eigen::VectorXd& desired,
                                               const Eigen::VectorXd& weights,
                                               double max_norm) const
{
  if (!cached_factorization_.has_value() || cached_weights_.size() != weights.size() ||
      cached_weights_ != weights)
  {
    cached_factorization_.emplace(J_, weights);
    cached_weights_ = weights;
  }
  return cached_factorization_->solve(desired, max_norm);
}

DiminishingRigidityModel::DiminishingRigidityModel(
    DiminishingRigidityParams params,
    std::shared_ptr<const GeodesicDistanceMatrix> distances)
  : params_(params), distances_(std::move(distances))
{
}

void DiminishingRigidityModel::setScene(const SceneState& scene)
{
  J_ = diminishing_rigidity_jacobian(params_, *distances_, scene.grippers, scene.grasped,
                                     scene.object);
}

const Eigen::MatrixXd& DiminishingRigidityModel::jacobian() const
{
  if (J_.size() == 0)
  {
    throw std::logic_error("DiminishingRigidityModel: jacobian requested before setScene");
  }
  return J_;
}

AdaptiveJacobianModel::AdaptiveJacobianModel(AdaptiveJacobianState initial_state)
  : state_(std::move(initial_state))
{
  if (!(state_.learning_rate > 0.0 && state_.learning_rate <= 1.0))
  {
    throw std::invalid_argument("AdaptiveJacobianModel: learning rate must be in (0, 1]");
  }
}

void AdaptiveJacobianModel::observe(const Eigen::VectorXd& qdot_executed,
                                    const Eigen::VectorXd& pdot_observed)
{
  state_ = broyden_update(state_, qdot_executed, pdot_observed).state;
}

std::vector<std::unique_ptr<DeformationModel>> model_set_factory(const ModelSetConfig& config)
{
  std::vector<std::unique_ptr<DeformationModel>> models;

  if (!config.constant_jacobians.empty())
  {
    for (const auto& J : config.constant_jacobians)
    {
      models.push_back(std::make_unique<ConstantJacobianModel>(J));
    }
    return models;
  }

  if ((config.k_trans_grid.empty() || config.k_rot_grid.empty()) && config.adaptive_rates.empty())
  {
    throw std::invalid_argument("model_set_factory: empty parameter grids");
  }

  const auto distances = std::make_shared<const GeodesicDistanceMatrix>(config.distances);
  for (const double k_trans : config.k_trans_grid)
  {
    for (const double k_rot : config.k_rot_grid)
    {
      models.push_back(
          std::make_unique<DiminishingRigidityModel>(DiminishingRigidityParams{k_trans, k_rot},
                                                     distances));
    }
  }

  if (!config.adaptive_rates.empty())
  {
    const Eigen::MatrixXd seed = diminishing_rigidity_jacobian(
        {config.adaptive_seed_k, config.adaptive_seed_k}, config.distances,
        config.initial_scene.grippers, config.initial_scene.grasped, config.initial_scene.object);
    std::vector<double> rates = config.adaptive_rates;
    std::sort(rates.begin(), rates.end(), std::greater<>());
    for (const double rate : rates)
    {
      models.push_back(std::make_unique<AdaptiveJacobianModel>(AdaptiveJacobianState{seed, rate}));
    }
  }

  if (models.empty())
  {
    throw std::invalid_argument("model_set_factory: configuration yields no models");
  }
  return models;
}
}
