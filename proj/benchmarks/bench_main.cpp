#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "banditservo/bandits.hpp"
#include "banditservo/models.hpp"
#include "banditservo/rng.hpp"
#include "banditservo/solver.hpp"
#include "banditservo/synthetic.hpp"
#include "banditservo/toy_world.hpp"

namespace
{
using namespace banditservo;

WeightedLeastSquaresProblem makeProblem(int rows, int cols, uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  WeightedLeastSquaresProblem p;
  p.J.resize(rows, cols);
  for (int c = 0; c < cols; c++)
    for (int r = 0; r < rows; r++)
      p.J(r, c) = u(rng);
  p.target.resize(rows);
  for (int r = 0; r < rows; r++)
    p.target(r) = u(rng);
  p.weights = Eigen::VectorXd::Constant(rows / 3, 1.0);
  p.max_norm = 0.1;
  return p;
}

void BM_SolverSolve(benchmark::State& state)
{
  const auto p = makeProblem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_ball_constrained_wls(p));
}
BENCHMARK(BM_SolverSolve)->Args({60, 12})->Args({441, 6})->Args({18225, 12});

void BM_SolverCachedSolve(benchmark::State& state)
{
  const auto p = makeProblem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 7);
  const BallConstrainedWlsFactorization factorization(p.J, p.weights);
  for (auto _ : state)
    benchmark::DoNotOptimize(factorization.solve(p.target, p.max_norm));
}
BENCHMARK(BM_SolverCachedSolve)->Args({60, 12})->Args({18225, 12});

void BM_RigidityJacobian(benchmark::State& state)
{
  const ToyWorld world = make_toy_world("chain-spread");
  const DiminishingRigidityParams params{10.0, 10.0};
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(diminishing_rigidity_jacobian(params, world.distances(),
                                                           world.scene().grippers,
                                                           world.scene().grasped,
                                                           world.scene().object));
  }
}
BENCHMARK(BM_RigidityJacobian);

void BM_BroydenUpdate(benchmark::State& state)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AdaptiveJacobianState adaptive;
  adaptive.J_tilde = Eigen::MatrixXd::Random(60, 12);
  adaptive.learning_rate = 0.1;
  Eigen::VectorXd qdot(12), pdot(60);
  for (int i = 0; i < qdot.size(); i++)
    qdot(i) = u(rng);
  for (int i = 0; i < pdot.size(); i++)
    pdot(i) = u(rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(broyden_update(adaptive, qdot, pdot));
}
BENCHMARK(BM_BroydenUpdate);

void BM_KfManbStep(benchmark::State& state)
{
  const int arms = static_cast<int>(state.range(0));
  std::mt19937_64 rng(13);
  KFMANBState kf(arms, 1e6, 1.0, 1.0);
  for (auto _ : state)
  {
    const int arm = kfmanb_select(kf, rng);
    kf = kfmanb_update(kf, {arm, 0.5});
  }
}
BENCHMARK(BM_KfManbStep)->Arg(10)->Arg(60);

void BM_KfMandbStep(benchmark::State& state)
{
  const int arms = static_cast<int>(state.range(0));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::VectorXd> commands;
  for (int m = 0; m < arms; m++)
  {
    Eigen::VectorXd cmd(12);
    for (int i = 0; i < cmd.size(); i++)
      cmd(i) = u(rng);
    commands.push_back(cmd);
  }
  const Eigen::MatrixXd similarity = vector_similarity_matrix(commands);
  KFMANDBState kf = kfmandb_init(arms, 1.0, 1.0, 0.9);
  for (auto _ : state)
  {
    const int arm = kfmandb_select(kf, rng);
    kf = kfmandb_predict(kf, similarity);
    kf = kfmandb_correct(kf, {arm, 0.5});
  }
}
BENCHMARK(BM_KfMandbStep)->Arg(10)->Arg(60);

void BM_CommandSimilarity(benchmark::State& state)
{
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<RobotCommand> commands;
  for (int m = 0; m < 60; m++)
  {
    RobotCommand cmd(2);
    for (auto& twist : cmd.twists)
      for (int i = 0; i < 3; i++)
      {
        twist.v(i) = u(rng);
        twist.omega(i) = u(rng);
      }
    commands.push_back(cmd);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(command_similarity_matrix(commands, 0.0025));
}
BENCHMARK(BM_CommandSimilarity);

void BM_SyntheticTrialSmall(benchmark::State& state)
{
  auto system_rng = make_stream(3, "system");
  const SyntheticSystem system = make_synthetic_system(3, 2, system_rng);
  auto model_rng = make_stream(3, "models");
  const auto models = make_synthetic_models(system, 10, model_rng);
  SyntheticTrialParams params;
  params.pulls = 1000;
  for (auto _ : state)
  {
    auto rng = make_stream(99, "kf-mandb");
    benchmark::DoNotOptimize(
        run_synthetic_trial(system, models, Algorithm::kf_mandb, params, rng));
  }
}
BENCHMARK(BM_SyntheticTrialSmall);
}  // namespace

BENCHMARK_MAIN();
