#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "banditservo/lie.hpp"

namespace banditservo
{
struct RewardObservation
{
  int arm = 0;
  double reward = 0.0;
};

// reward = drop in task error over the step
double compute_reward(double error_before, double error_after);

// Exponentially smoothed absolute-reward scale, floored at 1e-10:
// eta <- max(1e-10, 0.9 eta + 0.1 |reward|)
double anneal_eta(double eta, double reward);

////////////////////////////////////////////////////////////////////////////
// UCB1-Normal
////////////////////////////////////////////////////////////////////////////

struct UCB1NormalState
{
  std::vector<long> pulls;       // n_j
  Eigen::VectorXd mean;          // x-bar_j
  Eigen::VectorXd squared_sum;   // q_j
  long total_pulls = 0;          // n

  explicit UCB1NormalState(int arms)
    : pulls(arms, 0), mean(Eigen::VectorXd::Zero(arms)), squared_sum(Eigen::VectorXd::Zero(arms))
  {
  }
};

// Deterministic: an arm played fewer than ceil(8 ln n) times is explored
// first (least played, lowest index on ties; every arm is played once before
// the index bound is ever evaluated); otherwise the arm maximizing
//   x-bar_j + sqrt(16 * var_j * ln(n - 1) / n_j)
// with var_j the unbiased sample variance.
int ucb1_select(const UCB1NormalState& state);

UCB1NormalState ucb1_update(const UCB1NormalState& state, const RewardObservation& obs);

////////////////////////////////////////////////////////////////////////////
// Independent per-arm Kalman filters with Thompson sampling
////////////////////////////////////////////////////////////////////////////

struct KFMANBState
{
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  double sigma_tr2 = 1.0;
  double sigma_ob2 = 1.0;

  KFMANBState(int arms, double prior_variance, double sigma_tr2_in, double sigma_ob2_in)
    : mean(Eigen::VectorXd::Zero(arms)),
      variance(Eigen::VectorXd::Constant(arms, prior_variance)),
      sigma_tr2(sigma_tr2_in),
      sigma_ob2(sigma_ob2_in)
  {
  }
};

// Thompson sampling: draw x_j ~ Normal(mean_j, variance_j) per arm, return
// the argmax.
int kfmanb_select(const KFMANBState& state, std::mt19937_64& rng);

// Pulled arm i:
//   mean_i <- ((var_i + sigma_tr2) r + sigma_ob2 mean_i) / (var_i + sigma_tr2 + sigma_ob2)
//   var_i  <- ((var_i + sigma_tr2) sigma_ob2) / (var_i + sigma_tr2 + sigma_ob2)
// every other arm: mean unchanged, var += sigma_tr2.
KFMANBState kfmanb_update(const KFMANBState& state, const RewardObservation& obs);

////////////////////////////////////////////////////////////////////////////
// Joint Kalman filter over all arms, coupled through command similarity
////////////////////////////////////////////////////////////////////////////

struct KFMANDBState
{
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double sigma_tr2 = 1.0;
  double sigma_obs2 = 1.0;
  double xi = 0.9;
  double eta = 1.0;
};

// mean 0, covariance I * 1e6 (B = 1e6 * eta_0^2, eta_0 = 1)
KFMANDBState kfmandb_init(int arms, double sigma_tr2, double sigma_obs2, double xi);

// covariance += sigma_tr2 * eta^2 * (xi * similarity + (1 - xi) * I),
// re-symmetrized and jittered to positive definiteness. Throws
// std::runtime_error if the result is not PD after three jitter passes.
KFMANDBState kfmandb_predict(const KFMANDBState& state, const Eigen::MatrixXd& similarity);

// Scalar Kalman correction with a one-hot observation row for the pulled arm
// and observation noise sigma_obs2 * eta^2; correlated arms move too.
KFMANDBState kfmandb_correct(const KFMANDBState& state, const RewardObservation& obs);

// Draw one sample from Normal(mean, covariance) via the Cholesky factor,
// return the argmax component.
int kfmandb_select(const KFMANDBState& state, std::mt19937_64& rng);

// Cosine similarity matrix of plain command vectors; unit diagonal, entries
// clamped to [-1, 1], zero entries for commands with norm below 1e-10.
Eigen::MatrixXd vector_similarity_matrix(const std::vector<Eigen::VectorXd>& commands);

// Same, under the c-scaled twist inner product.
Eigen::MatrixXd command_similarity_matrix(const std::vector<RobotCommand>& commands, double c);

////////////////////////////////////////////////////////////////////////////
// Uniform front end over the three algorithms
////////////////////////////////////////////////////////////////////////////

enum class Algorithm
{
  ucb1_normal,
  kf_manb,
  kf_mandb,
};

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

struct BanditParams
{
  double sigma_tr2 = 1.0;
  double sigma_obs2 = 1.0;
  double xi = 0.9;

  friend bool operator==(const BanditParams&, const BanditParams&) = default;
};

// Owns the per-algorithm state plus the annealed reward scale eta. observe()
// anneals eta with the new reward first, then applies the algorithm's update
// with the eta^2-scaled noise terms (UCB1-Normal ignores eta).
class ArmSelector
{
public:
  ArmSelector(Algorithm algorithm, int arms, const BanditParams& params);

  Algorithm algorithm() const { return algorithm_; }
  int arms() const { return arms_; }
  bool needsSimilarity() const { return algorithm_ == Algorithm::kf_mandb; }
  double eta() const { return eta_; }

  int select(std::mt19937_64& rng);

  // similarity may be null unless needsSimilarity()
  void observe(const RewardObservation& obs, const Eigen::MatrixXd* similarity = nullptr);

  const UCB1NormalState& ucb1State() const { return ucb1_; }
  const KFMANBState& kfmanbState() const { return kfmanb_; }
  const KFMANDBState& kfmandbState() const { return kfmandb_; }

private:
  Algorithm algorithm_;
  int arms_;
  BanditParams params_;
  double eta_ = 1.0;
  UCB1NormalState ucb1_;
  KFMANBState kfmanb_;
  KFMANDBState kfmandb_;
};
}
