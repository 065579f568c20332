#include "banditservo/bandits.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace banditservo
{
double compute_reward(double error_before, double error_after)
{
  return error_before - error_after;
}

double anneal_eta(double eta, double reward)
{
  return std::max(1e-10, 0.9 * eta + 0.1 * std::abs(reward));
}

////////////////////////////////////////////////////////////////////////////
// UCB1-Normal
////////////////////////////////////////////////////////////////////////////

int ucb1_select(const UCB1NormalState& state)
{
  const int arms = static_cast<int>(state.pulls.size());
  assert(arms >= 1);
  if (arms == 1)
  {
    return 0;
  }

  int least = 0;
  for (int j = 1; j < arms; j++)
  {
    if (state.pulls[j] < state.pulls[least])
    {
      least = j;
    }
  }
  // Every arm is played once before the log bound is consulted, which also
  // keeps the argmax branch's n_j >= 2 and n >= 2 requirements safe.
  if (state.pulls[least] == 0)
  {
    return least;
  }
  const double threshold = std::ceil(8.0 * std::log(static_cast<double>(state.total_pulls)));
  if (static_cast<double>(state.pulls[least]) < threshold)
  {
    return least;
  }

  int best = 0;
  double best_bound = -std::numeric_limits<double>::infinity();
  const double log_term = std::log(static_cast<double>(state.total_pulls - 1));
  for (int j = 0; j < arms; j++)
  {
    const double n_j = static_cast<double>(state.pulls[j]);
    const double variance =
        std::max(0.0, (state.squared_sum(j) - n_j * state.mean(j) * state.mean(j)) / (n_j - 1.0));
    const double bound = state.mean(j) + std::sqrt(16.0 * variance * log_term / n_j);
    if (bound > best_bound)
    {
      best_bound = bound;
      best = j;
    }
  }
  return best;
}

UCB1NormalState ucb1_update(const UCB1NormalState& state, const RewardObservation& obs)
{
  assert(obs.arm >= 0 && obs.arm < static_cast<int>(state.pulls.size()));
  UCB1NormalState next = state;
  next.pulls[obs.arm]++;
  const double n_j = static_cast<double>(next.pulls[obs.arm]);
  next.mean(obs.arm) += (obs.reward - next.mean(obs.arm)) / n_j;
  next.squared_sum(obs.arm) += obs.reward * obs.reward;
  next.total_pulls++;
  return next;
}

////////////////////////////////////////////////////////////////////////////
// KF-MANB
////////////////////////////////////////////////////////////////////////////

int kfmanb_select(const KFMANBState& state, std::mt19937_64& rng)
{
  std::normal_distribution<double> standard_normal(0.0, 1.0);
  int best = 0;
  double best_sample = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < state.mean.size(); j++)
  {
    const double sample = state.mean(j) + std::sqrt(state.variance(j)) * standard_normal(rng);
    if (sample > best_sample)
    {
      best_sample = sample;
      best = j;
    }
  }
  return best;
}

KFMANBState kfmanb_update(const KFMANBState& state, const RewardObservation& obs)
{
  assert(obs.arm >= 0 && obs.arm < state.mean.size());
  KFMANBState next = state;
  next.variance.array() += state.sigma_tr2;

  const double predicted_variance = next.variance(obs.arm);
  const double innovation_variance = predicted_variance + state.sigma_ob2;
  next.mean(obs.arm) =
      (predicted_variance * obs.reward + state.sigma_ob2 * state.mean(obs.arm)) /
      innovation_variance;
  next.variance(obs.arm) = predicted_variance * state.sigma_ob2 / innovation_variance;
  return next;
}

////////////////////////////////////////////////////////////////////////////
// KF-MANDB
////////////////////////////////////////////////////////////////////////////

namespace
{
// Add 1e-12 * trace / M to the diagonal until the Cholesky succeeds, at most
// three times.
Eigen::LLT<Eigen::MatrixXd> choleskyWithJitter(Eigen::MatrixXd& covariance)
{
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  for (int attempt = 0; attempt < 3 && llt.info() != Eigen::Success; attempt++)
  {
    const double jitter =
        1e-12 * covariance.trace() / static_cast<double>(covariance.rows());
    covariance.diagonal().array() += jitter;
    llt.compute(covariance);
  }
  if (llt.info() != Eigen::Success)
  {
    throw std::runtime_error("KF-MANDB covariance is not positive definite after jitter");
  }
  return llt;
}
}

KFMANDBState kfmandb_init(int arms, double sigma_tr2, double sigma_obs2, double xi)
{
  KFMANDBState state;
  state.mean = Eigen::VectorXd::Zero(arms);
  state.covariance = Eigen::MatrixXd::Identity(arms, arms) * 1e6;
  state.sigma_tr2 = sigma_tr2;
  state.sigma_obs2 = sigma_obs2;
  state.xi = xi;
  state.eta = 1.0;
  return state;
}

KFMANDBState kfmandb_predict(const KFMANDBState& state, const Eigen::MatrixXd& similarity)
{
  const Eigen::Index arms = state.mean.size();
  assert(similarity.rows() == arms && similarity.cols() == arms);

  KFMANDBState next = state;
  const double scale = state.sigma_tr2 * state.eta * state.eta;
  next.covariance += scale * (state.xi * similarity +
                              (1.0 - state.xi) * Eigen::MatrixXd::Identity(arms, arms));
  next.covariance = (0.5 * (next.covariance + next.covariance.transpose())).eval();
  choleskyWithJitter(next.covariance);
  return next;
}

KFMANDBState kfmandb_correct(const KFMANDBState& state, const RewardObservation& obs)
{
  assert(obs.arm >= 0 && obs.arm < state.mean.size());
  KFMANDBState next = state;
  const double innovation_variance =
      state.covariance(obs.arm, obs.arm) + state.sigma_obs2 * state.eta * state.eta;
  const Eigen::VectorXd gain = state.covariance.col(obs.arm) / innovation_variance;
  next.mean += gain * (obs.reward - state.mean(obs.arm));
  next.covariance -= gain * state.covariance.row(obs.arm);
  next.covariance = (0.5 * (next.covariance + next.covariance.transpose())).eval();
  return next;
}

int kfmandb_select(const KFMANDBState& state, std::mt19937_64& rng)
{
  Eigen::MatrixXd covariance = state.covariance;
  const auto llt = choleskyWithJitter(covariance);

  std::normal_distribution<double> standard_normal(0.0, 1.0);
  Eigen::VectorXd z(state.mean.size());
  for (Eigen::Index j = 0; j < z.size(); j++)
  {
    z(j) = standard_normal(rng);
  }
  const Eigen::VectorXd sample = state.mean + llt.matrixL() * z;

  int best = 0;
  for (Eigen::Index j = 1; j < sample.size(); j++)
  {
    if (sample(j) > sample(best))
    {
      best = static_cast<int>(j);
    }
  }
  return best;
}

////////////////////////////////////////////////////////////////////////////
// Command similarity
////////////////////////////////////////////////////////////////////////////

namespace
{
Eigen::MatrixXd cosineSimilarity(const std::vector<Eigen::VectorXd>& commands,
                                 const std::vector<double>& norms)
{
  const int count = static_cast<int>(commands.size());
  Eigen::MatrixXd similarity = Eigen::MatrixXd::Identity(count, count);
  for (int i = 0; i < count; i++)
  {
    for (int j = i + 1; j < count; j++)
    {
      double entry = 0.0;
      if (norms[i] >= 1e-10 && norms[j] >= 1e-10)
      {
        entry = commands[i].dot(commands[j]) / (norms[i] * norms[j]);
        entry = std::clamp(entry, -1.0, 1.0);
      }
      similarity(i, j) = entry;
      similarity(j, i) = entry;
    }
  }
  return similarity;
}
}

Eigen::MatrixXd vector_similarity_matrix(const std::vector<Eigen::VectorXd>& commands)
{
  std::vector<double> norms(commands.size());
  for (size_t i = 0; i < commands.size(); i++)
  {
    norms[i] = commands[i].norm();
  }
  return cosineSimilarity(commands, norms);
}

Eigen::MatrixXd command_similarity_matrix(const std::vector<RobotCommand>& commands, double c)
{
  // Scaling omega by sqrt(c) turns the c-weighted twist inner product into a
  // plain dot product, so the cosine machinery is shared.
  const double sqrt_c = std::sqrt(c);
  std::vector<Eigen::VectorXd> embedded(commands.size());
  std::vector<double> norms(commands.size());
  for (size_t i = 0; i < commands.size(); i++)
  {
    Eigen::VectorXd q = commands[i].stacked();
    for (size_t g = 0; g < commands[i].grippers(); g++)
    {
      q.segment<3>(6 * static_cast<Eigen::Index>(g) + 3) *= sqrt_c;
    }
    embedded[i] = std::move(q);
    norms[i] = embedded[i].norm();
  }
  return cosineSimilarity(embedded, norms);
}

////////////////////////////////////////////////////////////////////////////
// ArmSelector
////////////////////////////////////////////////////////////////////////////

std::string to_string(Algorithm algorithm)
{
  switch (algorithm)
  {
    case Algorithm::ucb1_normal: return "ucb1-normal";
    case Algorithm::kf_manb: return "kf-manb";
    case Algorithm::kf_mandb: return "kf-mandb";
  }
  throw std::logic_error("unknown algorithm");
}

Algorithm algorithm_from_string(const std::string& name)
{
  if (name == "ucb1-normal")
  {
    return Algorithm::ucb1_normal;
  }
  if (name == "kf-manb")
  {
    return Algorithm::kf_manb;
  }
  if (name == "kf-mandb")
  {
    return Algorithm::kf_mandb;
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

ArmSelector::ArmSelector(Algorithm algorithm, int arms, const BanditParams& params)
  : algorithm_(algorithm),
    arms_(arms),
    params_(params),
    ucb1_(arms),
    kfmanb_(arms, 1e6, params.sigma_tr2, params.sigma_obs2),
    kfmandb_(kfmandb_init(arms, params.sigma_tr2, params.sigma_obs2, params.xi))
{
  if (arms < 1)
  {
    throw std::invalid_argument("ArmSelector: need at least one arm");
  }
}

int ArmSelector::select(std::mt19937_64& rng)
{
  switch (algorithm_)
  {
    case Algorithm::ucb1_normal: return ucb1_select(ucb1_);
    case Algorithm::kf_manb: return kfmanb_select(kfmanb_, rng);
    case Algorithm::kf_mandb: return kfmandb_select(kfmandb_, rng);
  }
  throw std::logic_error("unknown algorithm");
}

void ArmSelector::observe(const RewardObservation& obs, const Eigen::MatrixXd* similarity)
{
  eta_ = anneal_eta(eta_, obs.reward);
  switch (algorithm_)
  {
    case Algorithm::ucb1_normal:
      ucb1_ = ucb1_update(ucb1_, obs);
      return;
    case Algorithm::kf_manb:
      // Same eta^2 noise scaling the joint filter applies internally.
      kfmanb_.sigma_tr2 = params_.sigma_tr2 * eta_ * eta_;
      kfmanb_.sigma_ob2 = params_.sigma_obs2 * eta_ * eta_;
      kfmanb_ = kfmanb_update(kfmanb_, obs);
      return;
    case Algorithm::kf_mandb:
      if (similarity == nullptr)
      {
        throw std::invalid_argument("ArmSelector: KF-MANDB update needs the similarity matrix");
      }
      kfmandb_.eta = eta_;
      kfmandb_ = kfmandb_predict(kfmandb_, *similarity);
      kfmandb_ = kfmandb_correct(kfmandb_, obs);
      return;
  }
  throw std::logic_error("unknown algorithm");
}
}
