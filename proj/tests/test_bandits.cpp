#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "banditservo/bandits.hpp"

using namespace banditservo;

namespace
{
double ucb1Bound(double mean, double squared_sum, long n_j, long n)
{
  const double variance = (squared_sum - n_j * mean * mean) / (n_j - 1.0);
  return mean + std::sqrt(16.0 * variance * std::log(static_cast<double>(n - 1)) / n_j);
}

Eigen::MatrixXd randomCorrelation(int arms, std::mt19937_64& rng)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd raw = Eigen::MatrixXd::NullaryExpr(arms, arms, [&]() { return normal(rng); });
  Eigen::MatrixXd gram = raw * raw.transpose();
  Eigen::VectorXd scale = gram.diagonal().cwiseSqrt().cwiseInverse();
  return scale.asDiagonal() * gram * scale.asDiagonal();
}

RobotCommand translationCommand(const Eigen::Vector3d& v)
{
  RobotCommand command(1);
  command.twists[0].v = v;
  return command;
}
}

TEST_CASE("reward is the drop in task error")
{
  CHECK(compute_reward(10.0, 8.0) == doctest::Approx(2.0));
  CHECK(compute_reward(5.0, 5.0) == doctest::Approx(0.0));
  CHECK(compute_reward(3.0, 5.0) == doctest::Approx(-2.0));
}

TEST_CASE("eta annealing decays, floors, and rectifies")
{
  CHECK(anneal_eta(1.0, 0.0) == doctest::Approx(0.9));
  CHECK(anneal_eta(1e-10, 0.0) == doctest::Approx(1e-10));
  CHECK(anneal_eta(0.5, -2.0) == doctest::Approx(0.65));
}

TEST_CASE("a fresh ucb1 state explores arm zero first")
{
  const UCB1NormalState state(4);
  CHECK(ucb1_select(state) == 0);
}

TEST_CASE("ucb1 ties break to the lowest index")
{
  UCB1NormalState state(2);
  for (int arm = 0; arm < 2; arm++)
  {
    state.pulls[arm] = 60;
    state.mean(arm) = 1.0;
    state.squared_sum(arm) = 70.0;
  }
  state.total_pulls = 120;
  CHECK(ucb1_select(state) == 0);
}

TEST_CASE("the ucb1 index formula evaluates to the pinned reference value")
{
  // mean 1, sum of squares 10 over 5 pulls out of 20 total.
  CHECK(ucb1Bound(1.0, 10.0, 5, 20) == doctest::Approx(4.4319).epsilon(1e-4));
}

TEST_CASE("in the exploitation regime ucb1 picks the argmax of the index bounds")
{
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int trial = 0; trial < 30; trial++)
  {
    const int arms = 2 + trial % 4;
    UCB1NormalState state(arms);
    state.total_pulls = 0;
    for (int arm = 0; arm < arms; arm++)
    {
      // 60+ pulls per arm keeps every arm past the ceil(8 ln n) threshold.
      state.pulls[arm] = 60 + static_cast<long>(uniform(rng) * 40);
      state.total_pulls += state.pulls[arm];
      const double mean = 2.0 * uniform(rng) - 1.0;
      state.mean(arm) = mean;
      const double variance = 0.1 + uniform(rng);
      state.squared_sum(arm) = (state.pulls[arm] - 1) * variance +
                               state.pulls[arm] * mean * mean;
    }

    int expected = 0;
    double best = -1e300;
    for (int arm = 0; arm < arms; arm++)
    {
      const double bound =
          ucb1Bound(state.mean(arm), state.squared_sum(arm), state.pulls[arm],
                    state.total_pulls);
      if (bound > best)
      {
        best = bound;
        expected = arm;
      }
    }
    CHECK(ucb1_select(state) == expected);
  }
}

TEST_CASE("ucb1 never exploits while an arm is under the exploration threshold")
{
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  UCB1NormalState state(3);
  for (int step = 0; step < 400; step++)
  {
    const int arm = ucb1_select(state);
    if (state.total_pulls >= 1)
    {
      const double threshold = std::ceil(8.0 * std::log(static_cast<double>(state.total_pulls)));
      long least = state.pulls[0];
      int least_arm = 0;
      for (int j = 1; j < 3; j++)
      {
        if (state.pulls[j] < least)
        {
          least = state.pulls[j];
          least_arm = j;
        }
      }
      if (static_cast<double>(least) < threshold)
      {
        CHECK(arm == least_arm);
      }
    }
    state = ucb1_update(state, {arm, normal(rng)});
  }
}

TEST_CASE("ucb1 updates track running statistics")
{
  UCB1NormalState state(2);
  state = ucb1_update(state, {1, 2.0});
  CHECK(state.mean(1) == doctest::Approx(2.0));
  CHECK(state.squared_sum(1) == doctest::Approx(4.0));
  CHECK(state.pulls[1] == 1);
  CHECK(state.total_pulls == 1);

  state = ucb1_update(state, {0, 1.0});
  state = ucb1_update(state, {0, 3.0});
  CHECK(state.mean(0) == doctest::Approx(2.0));
  CHECK(state.squared_sum(0) == doctest::Approx(10.0));
}

TEST_CASE("a thousand ucb1 updates match batch statistics")
{
  std::mt19937_64 rng(43);
  std::normal_distribution<double> normal(1.0, 2.0);
  UCB1NormalState state(1);
  double sum = 0.0;
  double squares = 0.0;
  for (int i = 0; i < 1000; i++)
  {
    const double reward = normal(rng);
    sum += reward;
    squares += reward * reward;
    state = ucb1_update(state, {0, reward});
  }
  CHECK(state.mean(0) == doctest::Approx(sum / 1000.0).epsilon(1e-9));
  CHECK(state.squared_sum(0) == doctest::Approx(squares).epsilon(1e-9));
  CHECK(state.pulls[0] == 1000);
}

TEST_CASE("thompson sampling on a single arm always returns it")
{
  KFMANBState state(1, 1e6, 1.0, 1.0);
  std::mt19937_64 rng(44);
  for (int i = 0; i < 10; i++)
  {
    CHECK(kfmanb_select(state, rng) == 0);
  }
}

TEST_CASE("thompson sampling separates well-separated point masses")
{
  KFMANBState state(2, 1e-12, 1.0, 1.0);
  state.mean << 10.0, 0.0;
  std::mt19937_64 rng(45);
  for (int i = 0; i < 1000; i++)
  {
    CHECK(kfmanb_select(state, rng) == 0);
  }
}

TEST_CASE("thompson sampling splits symmetric arms evenly")
{
  KFMANBState state(2, 1.0, 1.0, 1.0);
  std::mt19937_64 rng(46);
  int first = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; i++)
  {
    if (kfmanb_select(state, rng) == 0)
    {
      first++;
    }
  }
  CHECK(std::abs(first / static_cast<double>(draws) - 0.5) < 0.05);
}

TEST_CASE("the per-arm kalman update matches scalar gaussian conditioning")
{
  KFMANBState state(2, 1.0, 1.0, 1.0);
  const KFMANBState next = kfmanb_update(state, {0, 2.0});
  CHECK(next.mean(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(next.variance(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Unpulled arms only diffuse.
  CHECK(next.mean(1) == doctest::Approx(0.0));
  CHECK(next.variance(1) == doctest::Approx(2.0));

  std::mt19937_64 rng(47);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.1, 2.0);
  for (int trial = 0; trial < 50; trial++)
  {
    KFMANBState random_state(1, uniform(rng), uniform(rng), uniform(rng));
    random_state.mean(0) = normal(rng);
    const double reward = normal(rng);

    // Oracle: diffuse the prior, then condition on the observation.
    const double prior_var = random_state.variance(0) + random_state.sigma_tr2;
    const double gain = prior_var / (prior_var + random_state.sigma_ob2);
    const double expected_mean = random_state.mean(0) + gain * (reward - random_state.mean(0));
    const double expected_var = (1.0 - gain) * prior_var;

    const KFMANBState posterior = kfmanb_update(random_state, {0, reward});
    CHECK(posterior.mean(0) == doctest::Approx(expected_mean).epsilon(1e-12));
    CHECK(posterior.variance(0) == doctest::Approx(expected_var).epsilon(1e-12));
  }
}

TEST_CASE("unpulled arms diffuse by exactly the transition noise")
{
  KFMANBState state(3, 5.0, 0.1, 1.0);
  state.mean << 1.0, 2.0, 3.0;
  const KFMANBState next = kfmanb_update(state, {1, 0.5});
  CHECK(next.mean(0) == doctest::Approx(1.0));
  CHECK(next.variance(0) == doctest::Approx(5.1));
  CHECK(next.mean(2) == doctest::Approx(3.0));
  CHECK(next.variance(2) == doctest::Approx(5.1));
}

TEST_CASE("an uninformative observation leaves the pulled arm untouched")
{
  KFMANBState state(1, 1.0, 1.0, 1e12);
  const KFMANBState next = kfmanb_update(state, {0, 2.0});
  CHECK(std::abs(next.mean(0)) < 1e-6);
}

TEST_CASE("joint filter predict adds identity process noise when decoupled")
{
  KFMANDBState state = kfmandb_init(3, 1.0, 1.0, 0.0);
  state.covariance = Eigen::MatrixXd::Identity(3, 3);

  std::mt19937_64 rng(48);
  const Eigen::MatrixXd similarity = randomCorrelation(3, rng);
  const KFMANDBState next = kfmandb_predict(state, similarity);
  CHECK((next.covariance - 2.0 * Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("identity similarity reduces predict to the decoupled case")
{
  KFMANDBState state = kfmandb_init(3, 1.0, 1.0, 0.9);
  state.covariance = Eigen::MatrixXd::Identity(3, 3);
  const KFMANDBState next = kfmandb_predict(state, Eigen::MatrixXd::Identity(3, 3));
  CHECK((next.covariance - 2.0 * Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("correlated process noise shows up in the off-diagonal increment")
{
  KFMANDBState state = kfmandb_init(2, 1.0, 1.0, 0.9);
  state.covariance = Eigen::MatrixXd::Zero(2, 2);
  state.covariance.diagonal().setConstant(1.0);

  Eigen::MatrixXd similarity(2, 2);
  similarity << 1.0, 0.5, 0.5, 1.0;
  const KFMANDBState next = kfmandb_predict(state, similarity);
  CHECK(next.covariance(0, 1) == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(next.covariance(1, 0) == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(next.covariance(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("joint correction matches brute-force gaussian conditioning")
{
  std::mt19937_64 rng(49);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 30; trial++)
  {
    const int arms = 2 + trial % 4;
    KFMANDBState state = kfmandb_init(arms, 1.0, 0.7, 0.9);
    state.eta = 0.8;
    state.mean = Eigen::VectorXd::NullaryExpr(arms, [&]() { return normal(rng); });
    Eigen::MatrixXd raw = Eigen::MatrixXd::NullaryExpr(arms, arms, [&]() { return normal(rng); });
    state.covariance = raw * raw.transpose() +
                       0.5 * Eigen::MatrixXd::Identity(arms, arms);

    const int arm = trial % arms;
    const double reward = normal(rng);

    // Oracle: condition the joint gaussian on the one observed coordinate.
    Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(arms);
    C(arm) = 1.0;
    const double obs_var = state.sigma_obs2 * state.eta * state.eta;
    const Eigen::MatrixXd S = C * state.covariance * C.transpose() +
                              obs_var * Eigen::MatrixXd::Identity(1, 1);
    const Eigen::MatrixXd K = state.covariance * C.transpose() * S.inverse();
    const Eigen::VectorXd expected_mean =
        state.mean + K * (Eigen::VectorXd::Constant(1, reward) - C * state.mean);
    const Eigen::MatrixXd expected_cov =
        state.covariance - K * C * state.covariance;

    const KFMANDBState next = kfmandb_correct(state, {arm, reward});
    CHECK((next.mean - expected_mean).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK((next.covariance - expected_cov).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("observing one arm moves a correlated neighbor")
{
  KFMANDBState state = kfmandb_init(2, 1.0, 1.0, 0.9);
  state.covariance << 1.0, 0.5, 0.5, 1.0;
  state.eta = 1.0;

  const KFMANDBState next = kfmandb_correct(state, {0, 2.0});
  // Gain for arm 1 is cov(1,0) / (cov(0,0) + obs noise) = 0.25.
  CHECK(next.mean(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(next.mean(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a nearly uninformative observation barely changes the joint belief")
{
  KFMANDBState state = kfmandb_init(3, 1.0, 1e12, 0.9);
  state.covariance = Eigen::MatrixXd::Identity(3, 3);
  const KFMANDBState next = kfmandb_correct(state, {0, 5.0});
  CHECK((next.mean - state.mean).lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK((next.covariance - state.covariance).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("joint thompson sampling favors a dominant mean")
{
  KFMANDBState state = kfmandb_init(4, 1.0, 1.0, 0.9);
  state.covariance = 1e-12 * Eigen::MatrixXd::Identity(4, 4);
  state.mean << 0.0, 0.0, 0.0, 10.0;
  std::mt19937_64 rng(50);
  for (int i = 0; i < 1000; i++)
  {
    CHECK(kfmandb_select(state, rng) == 3);
  }
}

TEST_CASE("joint thompson sampling with one arm returns it")
{
  const KFMANDBState state = kfmandb_init(1, 1.0, 1.0, 0.9);
  std::mt19937_64 rng(51);
  CHECK(kfmandb_select(state, rng) == 0);
}

TEST_CASE("exchangeable joint beliefs select uniformly")
{
  const int arms = 4;
  KFMANDBState state = kfmandb_init(arms, 1.0, 1.0, 0.9);
  state.covariance = Eigen::MatrixXd::Constant(arms, arms, 0.3);
  state.covariance.diagonal().setConstant(1.0);

  std::mt19937_64 rng(52);
  std::vector<int> counts(arms, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; i++)
  {
    counts[kfmandb_select(state, rng)]++;
  }
  for (int arm = 0; arm < arms; arm++)
  {
    CHECK(std::abs(counts[arm] / static_cast<double>(draws) - 0.25) < 0.05);
  }
}

TEST_CASE("shifting all means by a constant does not change the selected arm")
{
  std::mt19937_64 rng(53);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; trial++)
  {
    const int arms = 3;
    KFMANDBState state = kfmandb_init(arms, 1.0, 1.0, 0.9);
    state.mean = Eigen::VectorXd::NullaryExpr(arms, [&]() { return normal(rng); });
    Eigen::MatrixXd raw = Eigen::MatrixXd::NullaryExpr(arms, arms, [&]() { return normal(rng); });
    state.covariance = raw * raw.transpose() + Eigen::MatrixXd::Identity(arms, arms);

    KFMANDBState shifted = state;
    shifted.mean.array() += 42.0;

    // Identical seeds pair the standard-normal draws between the two states.
    std::mt19937_64 rng_a(1000 + trial);
    std::mt19937_64 rng_b(1000 + trial);
    CHECK(kfmandb_select(state, rng_a) == kfmandb_select(shifted, rng_b));
  }
}

TEST_CASE("the joint filter with zero coupling reproduces the per-arm filter")
{
  std::mt19937_64 rng(54);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 4);

  for (int sequence = 0; sequence < 50; sequence++)
  {
    const int arms = 5;
    const double eta = 0.7;
    KFMANDBState joint = kfmandb_init(arms, 1.3, 0.6, 0.0);
    joint.eta = eta;
    KFMANBState per_arm(arms, 1e6, 1.3 * eta * eta, 0.6 * eta * eta);

    for (int step = 0; step < 100; step++)
    {
      const RewardObservation obs{pick(rng), 3.0 * normal(rng)};
      const Eigen::MatrixXd similarity = randomCorrelation(arms, rng);
      joint = kfmandb_predict(joint, similarity);
      joint = kfmandb_correct(joint, obs);
      per_arm = kfmanb_update(per_arm, obs);

      CHECK((joint.mean - per_arm.mean).lpNorm<Eigen::Infinity>() < 1e-9);
      CHECK((joint.covariance.diagonal() - per_arm.variance).lpNorm<Eigen::Infinity>() < 1e-9);

      Eigen::MatrixXd off_diagonal = joint.covariance;
      off_diagonal.diagonal().setZero();
      CHECK(off_diagonal.lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
}

TEST_CASE("the joint covariance survives thousands of random filter cycles")
{
  std::mt19937_64 rng(55);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 5);

  KFMANDBState state = kfmandb_init(6, 1.0, 1.0, 0.9);
  state.eta = 0.01;  // small eta stresses the jitter path
  for (int step = 0; step < 10000; step++)
  {
    const Eigen::MatrixXd similarity = randomCorrelation(6, rng);
    state = kfmandb_predict(state, similarity);
    state = kfmandb_correct(state, {pick(rng), normal(rng)});
  }
  CHECK((state.covariance - state.covariance.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);
  const Eigen::VectorXd eigenvalues =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(state.covariance).eigenvalues();
  CHECK(eigenvalues.minCoeff() > 0.0);
}

TEST_CASE("command similarity hits the cosine landmarks")
{
  const RobotCommand forward = translationCommand(Eigen::Vector3d(0.1, 0, 0));
  const RobotCommand backward = translationCommand(Eigen::Vector3d(-0.1, 0, 0));
  const RobotCommand sideways = translationCommand(Eigen::Vector3d(0, 0.2, 0));

  const Eigen::MatrixXd similarity =
      command_similarity_matrix({forward, backward, sideways}, 0.0025);
  CHECK(similarity(0, 0) == doctest::Approx(1.0));
  CHECK(similarity(0, 1) == doctest::Approx(-1.0));
  CHECK(similarity(0, 2) == doctest::Approx(0.0));
  CHECK(similarity(1, 2) == doctest::Approx(0.0));
}

TEST_CASE("zero commands decouple without breaking the diagonal")
{
  const RobotCommand zero = translationCommand(Eigen::Vector3d::Zero());
  const RobotCommand forward = translationCommand(Eigen::Vector3d(0.1, 0, 0));

  const Eigen::MatrixXd similarity = command_similarity_matrix({zero, forward}, 0.0025);
  CHECK(similarity(0, 0) == doctest::Approx(1.0));
  CHECK(similarity(1, 1) == doctest::Approx(1.0));
  CHECK(similarity(0, 1) == doctest::Approx(0.0));
  CHECK(similarity(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("random nonzero command sets give symmetric unit-diagonal PSD similarity")
{
  std::mt19937_64 rng(56);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; trial++)
  {
    std::vector<RobotCommand> commands;
    const int count = 2 + trial % 8;
    for (int i = 0; i < count; i++)
    {
      RobotCommand command(2);
      for (auto& twist : command.twists)
      {
        twist.v = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
        twist.omega = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
      }
      commands.push_back(command);
    }

    const Eigen::MatrixXd similarity = command_similarity_matrix(commands, 0.0025);
    CHECK((similarity - similarity.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((similarity.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(similarity.maxCoeff() <= 1.0 + 1e-12);
    CHECK(similarity.minCoeff() >= -1.0 - 1e-12);
    const Eigen::VectorXd eigenvalues =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(similarity).eigenvalues();
    CHECK(eigenvalues.minCoeff() >= -1e-10);
  }
}

TEST_CASE("the c factor controls how much rotation counts toward similarity")
{
  RobotCommand rotation(1);
  rotation.twists[0].omega = Eigen::Vector3d(1, 0, 0);
  RobotCommand mixed(1);
  mixed.twists[0].v = Eigen::Vector3d(1, 0, 0);
  mixed.twists[0].omega = Eigen::Vector3d(1, 0, 0);

  // With c = 0 the rotation-only command counts as zero-norm.
  const Eigen::MatrixXd decoupled = command_similarity_matrix({rotation, mixed}, 0.0);
  CHECK(decoupled(0, 1) == doctest::Approx(0.0));

  const Eigen::MatrixXd coupled = command_similarity_matrix({rotation, mixed}, 1.0);
  CHECK(coupled(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("algorithm names round-trip")
{
  for (const Algorithm algorithm :
       {Algorithm::ucb1_normal, Algorithm::kf_manb, Algorithm::kf_mandb})
  {
    CHECK(algorithm_from_string(to_string(algorithm)) == algorithm);
  }
  CHECK_THROWS_AS(algorithm_from_string("epsilon-greedy"), std::invalid_argument);
}

TEST_CASE("the selector anneals eta before applying the update")
{
  ArmSelector selector(Algorithm::kf_manb, 2, BanditParams{});
  CHECK(selector.eta() == doctest::Approx(1.0));

  selector.observe({0, 2.0});
  // eta moves to 0.9 * 1 + 0.1 * 2 = 1.1 first, so the update runs with
  // noise scaled by 1.1^2.
  CHECK(selector.eta() == doctest::Approx(1.1));

  KFMANBState manual(2, 1e6, 1.1 * 1.1, 1.1 * 1.1);
  manual = kfmanb_update(manual, {0, 2.0});
  CHECK(selector.kfmanbState().mean(0) == doctest::Approx(manual.mean(0)).epsilon(1e-12));
  CHECK(selector.kfmanbState().variance(0) ==
        doctest::Approx(manual.variance(0)).epsilon(1e-12));
}

TEST_CASE("the ucb1 selector ignores eta in its statistics")
{
  ArmSelector selector(Algorithm::ucb1_normal, 2, BanditParams{});
  selector.observe({0, 4.0});
  CHECK(selector.eta() == doctest::Approx(0.9 + 0.4));
  CHECK(selector.ucb1State().mean(0) == doctest::Approx(4.0));
  CHECK(selector.ucb1State().squared_sum(0) == doctest::Approx(16.0));
}

TEST_CASE("the joint selector requires a similarity matrix and consumes it")
{
  ArmSelector selector(Algorithm::kf_mandb, 2, BanditParams{});
  CHECK(selector.needsSimilarity());
  CHECK_THROWS_AS(selector.observe({0, 1.0}), std::invalid_argument);

  Eigen::MatrixXd similarity(2, 2);
  similarity << 1.0, 0.5, 0.5, 1.0;
  selector.observe({0, 1.0}, &similarity);
  // Predict has run: the off-diagonal term sigma_tr2 eta^2 xi 0.5 shows up in
  // the correlation between arms (before correction scales it down).
  CHECK(selector.kfmandbState().mean(0) != 0.0);

  ArmSelector ucb(Algorithm::ucb1_normal, 2, BanditParams{});
  CHECK_FALSE(ucb.needsSimilarity());

  CHECK_THROWS_AS(ArmSelector(Algorithm::kf_manb, 0, BanditParams{}), std::invalid_argument);
}
