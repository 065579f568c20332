#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "banditservo/models.hpp"
#include "banditservo/toy_world.hpp"

using namespace banditservo;

namespace
{
std::vector<Eigen::Vector3d> chainPoints(int count, double spacing)
{
  std::vector<Eigen::Vector3d> points(count);
  for (int i = 0; i < count; i++)
  {
    points[i] = Eigen::Vector3d(spacing * i, 0.0, 0.0);
  }
  return points;
}

std::vector<GraphEdge> chainEdges(int count, double spacing)
{
  std::vector<GraphEdge> edges;
  for (int i = 0; i + 1 < count; i++)
  {
    edges.push_back({i, i + 1, spacing});
  }
  return edges;
}

Eigen::MatrixXd floydWarshall(int count, const std::vector<GraphEdge>& edges)
{
  const double inf = 1e100;
  Eigen::MatrixXd D = Eigen::MatrixXd::Constant(count, count, inf);
  for (int i = 0; i < count; i++)
  {
    D(i, i) = 0.0;
  }
  for (const GraphEdge& edge : edges)
  {
    D(edge.a, edge.b) = std::min(D(edge.a, edge.b), edge.length);
    D(edge.b, edge.a) = std::min(D(edge.b, edge.a), edge.length);
  }
  for (int k = 0; k < count; k++)
  {
    for (int i = 0; i < count; i++)
    {
      for (int j = 0; j < count; j++)
      {
        D(i, j) = std::min(D(i, j), D(i, k) + D(k, j));
      }
    }
  }
  return D;
}

SceneState singleGripperScene(int points, double spacing)
{
  SceneState scene;
  scene.object.points.resize(3, points);
  for (int i = 0; i < points; i++)
  {
    scene.object.points.col(i) = Eigen::Vector3d(spacing * i, 0.0, 0.0);
  }
  GripperPose pose;
  pose.translation = scene.object.points.col(0);
  scene.grippers = {pose};
  scene.grasped = {{0}};
  return scene;
}
}

TEST_CASE("chain geodesics are multiples of the spacing")
{
  const GeodesicDistanceMatrix D =
      geodesic_distance_matrix(chainPoints(5, 0.025), chainEdges(5, 0.025));
  for (int i = 0; i < 5; i++)
  {
    for (int j = 0; j < 5; j++)
    {
      CHECK(D.D(i, j) == doctest::Approx(0.025 * std::abs(i - j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("triangle geodesics are all unit length off the diagonal")
{
  std::vector<Eigen::Vector3d> points = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0),
                                         Eigen::Vector3d(0.5, 0.8, 0)};
  std::vector<GraphEdge> edges = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
  const GeodesicDistanceMatrix D = geodesic_distance_matrix(points, edges);
  for (int i = 0; i < 3; i++)
  {
    for (int j = 0; j < 3; j++)
    {
      CHECK(D.D(i, j) == doctest::Approx(i == j ? 0.0 : 1.0));
    }
  }
}

TEST_CASE("grid mesh geodesics match a Floyd-Warshall oracle")
{
  // 4x4 grid with assorted edge lengths, including a diagonal shortcut.
  std::vector<Eigen::Vector3d> points;
  std::vector<GraphEdge> edges;
  for (int r = 0; r < 4; r++)
  {
    for (int c = 0; c < 4; c++)
    {
      points.emplace_back(0.1 * c, 0.1 * r, 0.0);
    }
  }
  const auto id = [](int r, int c) { return 4 * r + c; };
  for (int r = 0; r < 4; r++)
  {
    for (int c = 0; c < 4; c++)
    {
      if (c + 1 < 4)
      {
        edges.push_back({id(r, c), id(r, c + 1), 0.1 + 0.01 * r});
      }
      if (r + 1 < 4)
      {
        edges.push_back({id(r, c), id(r + 1, c), 0.1 + 0.02 * c});
      }
    }
  }
  edges.push_back({id(0, 0), id(1, 1), 0.05});

  const GeodesicDistanceMatrix D = geodesic_distance_matrix(points, edges);
  const Eigen::MatrixXd oracle = floydWarshall(16, edges);
  // The two algorithms sum edge lengths in different orders, so agreement is
  // only up to roundoff.
  CHECK((D.D - oracle).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((D.D - D.D.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(D.D.diagonal().lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("disconnected graphs are rejected with component information")
{
  std::vector<Eigen::Vector3d> points = chainPoints(4, 1.0);
  std::vector<GraphEdge> edges = {{0, 1, 1.0}, {2, 3, 1.0}};
  CHECK_THROWS_WITH_AS(geodesic_distance_matrix(points, edges),
                       doctest::Contains("component"), std::invalid_argument);
}

TEST_CASE("zero rigidity decay reproduces the full rigid jacobian everywhere")
{
  const SceneState scene = singleGripperScene(4, 0.025);
  const GeodesicDistanceMatrix D =
      geodesic_distance_matrix(chainPoints(4, 0.025), chainEdges(4, 0.025));

  const Eigen::MatrixXd J = diminishing_rigidity_jacobian({0.0, 0.0}, D, scene.grippers,
                                                          scene.grasped, scene.object);
  REQUIRE(J.rows() == 12);
  REQUIRE(J.cols() == 6);
  for (int i = 0; i < 4; i++)
  {
    const Eigen::MatrixXd rigid =
        rigid_point_jacobian(scene.grippers[0], scene.object.points.col(i));
    CHECK((J.middleRows<3>(3 * i) - rigid).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
  }
}

TEST_CASE("rigidity decay halves the translational block at ln2 per unit distance")
{
  SceneState scene = singleGripperScene(2, 1.0);
  const GeodesicDistanceMatrix D =
      geodesic_distance_matrix(chainPoints(2, 1.0), chainEdges(2, 1.0));

  const Eigen::MatrixXd J = diminishing_rigidity_jacobian({std::log(2.0), 0.0}, D,
                                                          scene.grippers, scene.grasped,
                                                          scene.object);
  const Eigen::MatrixXd rigid =
      rigid_point_jacobian(scene.grippers[0], scene.object.points.col(1));
  CHECK((J.block<3, 3>(3, 0) - 0.5 * rigid.leftCols<3>()).lpNorm<Eigen::Infinity>() < 1e-12);
  // k_rot is zero, so the rotational block is untouched.
  CHECK((J.block<3, 3>(3, 3) - rigid.rightCols<3>()).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("the grasped point keeps a fully rigid block at any decay rate")
{
  const SceneState scene = singleGripperScene(5, 0.025);
  const GeodesicDistanceMatrix D =
      geodesic_distance_matrix(chainPoints(5, 0.025), chainEdges(5, 0.025));

  const Eigen::MatrixXd J = diminishing_rigidity_jacobian({17.0, 23.0}, D, scene.grippers,
                                                          scene.grasped, scene.object);
  const Eigen::MatrixXd rigid =
      rigid_point_jacobian(scene.grippers[0], scene.object.points.col(0));
  CHECK((J.topRows<3>() - rigid).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
}

TEST_CASE("rigidity weights decrease with distance and with the decay rate")
{
  const SceneState scene = singleGripperScene(6, 0.1);
  const GeodesicDistanceMatrix D =
      geodesic_distance_matrix(chainPoints(6, 0.1), chainEdges(6, 0.1));

  const Eigen::MatrixXd lowK = diminishing_rigidity_jacobian({4.0, 4.0}, D, scene.grippers,
                                                             scene.grasped, scene.object);
  const Eigen::MatrixXd highK = diminishing_rigidity_jacobian({12.0, 12.0}, D, scene.grippers,
                                                              scene.grasped, scene.object);
  double previous = 2.0;
  for (int i = 0; i < 6; i++)
  {
    // Translational diagonal entry equals the rigidity weight itself.
    const double weight = lowK(3 * i, 0);
    CHECK(weight <= previous + 1e-15);
    CHECK(highK(3 * i, 0) <= weight + 1e-15);
    previous = weight;
  }
}

TEST_CASE("grasping no points is a configuration error")
{
  const SceneState scene = singleGripperScene(3, 0.1);
  const GeodesicDistanceMatrix D =
      geodesic_distance_matrix(chainPoints(3, 0.1), chainEdges(3, 0.1));
  CHECK_THROWS_AS(diminishing_rigidity_jacobian({1.0, 1.0}, D, scene.grippers, {{}},
                                                scene.object),
                  std::invalid_argument);
}

TEST_CASE("a perfect prediction leaves the broyden estimate untouched")
{
  AdaptiveJacobianState state;
  state.J_tilde = Eigen::MatrixXd::Random(6, 4);
  state.learning_rate = 0.7;
  Eigen::VectorXd qdot = Eigen::VectorXd::Random(4);

  const BroydenUpdateResult result = broyden_update(state, qdot, state.J_tilde * qdot);
  CHECK(result.updated);
  CHECK((result.state.J_tilde - state.J_tilde).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("a unit learning rate fits the observed secant exactly")
{
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 30; trial++)
  {
    AdaptiveJacobianState state;
    state.J_tilde = Eigen::MatrixXd::NullaryExpr(9, 6, [&]() { return normal(rng); });
    state.learning_rate = 1.0;
    const Eigen::VectorXd qdot = Eigen::VectorXd::NullaryExpr(6, [&]() { return normal(rng); });
    const Eigen::VectorXd pdot = Eigen::VectorXd::NullaryExpr(9, [&]() { return normal(rng); });

    const BroydenUpdateResult result = broyden_update(state, qdot, pdot);
    CHECK((result.state.J_tilde * qdot - pdot).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("scalar broyden update reproduces the textbook arithmetic")
{
  AdaptiveJacobianState state;
  state.J_tilde = Eigen::MatrixXd::Zero(1, 1);
  state.learning_rate = 0.5;
  Eigen::VectorXd qdot(1);
  qdot << 2.0;
  Eigen::VectorXd pdot(1);
  pdot << 4.0;

  const BroydenUpdateResult result = broyden_update(state, qdot, pdot);
  CHECK(result.state.J_tilde(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("near-zero commands skip the broyden update")
{
  AdaptiveJacobianState state;
  state.J_tilde = Eigen::MatrixXd::Ones(3, 2);
  Eigen::VectorXd qdot = Eigen::VectorXd::Constant(2, 1e-8);
  Eigen::VectorXd pdot = Eigen::VectorXd::Ones(3);

  const BroydenUpdateResult result = broyden_update(state, qdot, pdot);
  CHECK_FALSE(result.updated);
  CHECK((result.state.J_tilde - state.J_tilde).lpNorm<Eigen::Infinity>() == 0.0);

  // The same norm passes a looser guard.
  CHECK(broyden_update(state, qdot, pdot, 1e-20).updated);
}

TEST_CASE("broyden update is invariant to joint scaling of the observation")
{
  std::mt19937_64 rng(32);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 20; trial++)
  {
    AdaptiveJacobianState state;
    state.J_tilde = Eigen::MatrixXd::NullaryExpr(6, 4, [&]() { return normal(rng); });
    state.learning_rate = 0.3;
    const Eigen::VectorXd qdot = Eigen::VectorXd::NullaryExpr(4, [&]() { return normal(rng); });
    const Eigen::VectorXd pdot = Eigen::VectorXd::NullaryExpr(6, [&]() { return normal(rng); });

    const Eigen::MatrixXd plain = broyden_update(state, qdot, pdot).state.J_tilde;
    const Eigen::MatrixXd scaled = broyden_update(state, -3.7 * qdot, -3.7 * pdot).state.J_tilde;
    CHECK((plain - scaled).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("model predictions are linear in the command")
{
  std::mt19937_64 rng(33);
  std::normal_distribution<double> normal(0.0, 1.0);
  ConstantJacobianModel model(Eigen::MatrixXd::NullaryExpr(6, 4, [&]() { return normal(rng); }));
  const Eigen::VectorXd qdot = Eigen::VectorXd::NullaryExpr(4, [&]() { return normal(rng); });

  CHECK((model.predict(2.5 * qdot) - 2.5 * model.predict(qdot)).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("model commands respect the velocity bound")
{
  std::mt19937_64 rng(34);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; trial++)
  {
    ConstantJacobianModel model(
        Eigen::MatrixXd::NullaryExpr(9, 6, [&]() { return normal(rng); }));
    const Eigen::VectorXd desired =
        Eigen::VectorXd::NullaryExpr(9, [&]() { return 10.0 * normal(rng); });
    const Eigen::VectorXd weights = Eigen::VectorXd::Ones(3);
    const Eigen::VectorXd qdot = model.command(desired, weights, 0.1);
    CHECK(qdot.norm() <= 0.1 * (1.0 + 1e-8));
  }
}

TEST_CASE("cached constant-jacobian commands equal fresh solves across weight changes")
{
  std::mt19937_64 rng(35);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::MatrixXd J = Eigen::MatrixXd::NullaryExpr(9, 6, [&]() { return normal(rng); });
  ConstantJacobianModel model(J);

  for (int trial = 0; trial < 6; trial++)
  {
    // Repeat each weight vector twice so both the cold and warm cache paths run.
    Eigen::VectorXd weights =
        Eigen::VectorXd::NullaryExpr(3, [&]() { return 0.1 + std::abs(normal(rng)); });
    for (int repeat = 0; repeat < 2; repeat++)
    {
      const Eigen::VectorXd desired =
          Eigen::VectorXd::NullaryExpr(9, [&]() { return normal(rng); });
      const Eigen::VectorXd cached = model.command(desired, weights, 0.2);
      const Eigen::VectorXd fresh = solve_ball_constrained_wls({J, desired, weights, 0.2});
      CHECK((cached - fresh).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }
}

TEST_CASE("the standard model set holds 49 rigidity models then 11 adaptive ones")
{
  const ToyWorld world = make_toy_world("chain-spread");
  ModelSetConfig config;
  config.distances = world.distances();
  config.initial_scene = world.scene();

  const auto models = model_set_factory(config);
  REQUIRE(models.size() == 60);

  // Grid order is row-major in (k_trans, k_rot).
  const auto* first = dynamic_cast<const DiminishingRigidityModel*>(models[0].get());
  REQUIRE(first != nullptr);
  CHECK(first->params().k_trans == 0.0);
  CHECK(first->params().k_rot == 0.0);

  const auto* second = dynamic_cast<const DiminishingRigidityModel*>(models[1].get());
  REQUIRE(second != nullptr);
  CHECK(second->params().k_trans == 0.0);
  CHECK(second->params().k_rot == 4.0);

  const auto* eighth = dynamic_cast<const DiminishingRigidityModel*>(models[7].get());
  REQUIRE(eighth != nullptr);
  CHECK(eighth->params().k_trans == 4.0);
  CHECK(eighth->params().k_rot == 0.0);

  const auto* last_grid = dynamic_cast<const DiminishingRigidityModel*>(models[48].get());
  REQUIRE(last_grid != nullptr);
  CHECK(last_grid->params().k_trans == 24.0);
  CHECK(last_grid->params().k_rot == 24.0);

  // Adaptive models follow, learning rates descending from 1.
  const auto* adaptive = dynamic_cast<const AdaptiveJacobianModel*>(models[49].get());
  REQUIRE(adaptive != nullptr);
  CHECK(adaptive->state().learning_rate == 1.0);
  const auto* least = dynamic_cast<const AdaptiveJacobianModel*>(models[59].get());
  REQUIRE(least != nullptr);
  CHECK(least->state().learning_rate == doctest::Approx(1e-10));

  // Adaptive estimates start from the seed-k rigidity jacobian.
  const Eigen::MatrixXd seed = diminishing_rigidity_jacobian(
      {config.adaptive_seed_k, config.adaptive_seed_k}, config.distances,
      config.initial_scene.grippers, config.initial_scene.grasped, config.initial_scene.object);
  CHECK((adaptive->jacobian() - seed).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("a singleton grid with no adaptive rates yields one model")
{
  const ToyWorld world = make_toy_world("chain-spread");
  ModelSetConfig config;
  config.k_trans_grid = {0.0};
  config.k_rot_grid = {0.0};
  config.adaptive_rates = {};
  config.distances = world.distances();
  config.initial_scene = world.scene();

  CHECK(model_set_factory(config).size() == 1);

  config.k_trans_grid = {};
  config.k_rot_grid = {};
  CHECK_THROWS_AS(model_set_factory(config), std::invalid_argument);
}

TEST_CASE("explicit constant jacobians bypass the grid entirely")
{
  ModelSetConfig config;
  config.constant_jacobians = {Eigen::MatrixXd::Identity(3, 2),
                               2.0 * Eigen::MatrixXd::Identity(3, 2),
                               3.0 * Eigen::MatrixXd::Identity(3, 2)};

  const auto models = model_set_factory(config);
  REQUIRE(models.size() == 3);
  for (size_t i = 0; i < models.size(); i++)
  {
    CHECK(models[i]->jacobian()(0, 0) == doctest::Approx(static_cast<double>(i + 1)));
  }
}
