#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "banditservo/bandits.hpp"
#include "banditservo/models.hpp"

namespace banditservo
{
// Linear underactuated plant ydot = J_true xdot with m < n.
struct SyntheticSystem
{
  Eigen::MatrixXd J_true;
  Eigen::VectorXd y;
  int n = 0;
  int m = 0;
};

// J_true = [I_m; 0] plus elementwise uniform(-noise, noise) drawn in
// column-major order; y starts at (10, ..., 10). Throws std::invalid_argument
// unless m < n.
SyntheticSystem make_synthetic_system(int n, int m, std::mt19937_64& rng, double noise = 0.1);

// count constant-Jacobian models, each J_true plus independent elementwise
// uniform(-noise, noise), same draw order as make_synthetic_system.
std::vector<std::unique_ptr<DeformationModel>> make_synthetic_models(const SyntheticSystem& system,
                                                                     int count,
                                                                     std::mt19937_64& rng,
                                                                     double noise = 0.025);

struct TrialStep
{
  int arm = 0;
  double reward = 0.0;
  double best_reward = 0.0;  // max over all arms' counterfactual rewards
  double error = 0.0;        // rho(t) = |y| before the pull
  double eta = 0.0;          // annealed reward scale after the update
  double cum_regret = 0.0;
};

struct TrialRecord
{
  std::vector<TrialStep> steps;
  double total_regret = 0.0;
  bool aborted = false;
  std::string diagnostic;
};

struct SyntheticTrialParams
{
  int pulls = 1000;
  double v_max = 0.1;
  BanditParams bandit;
};

// One trial: per pull every model proposes a command toward -y, the selected
// one executes against the true plant, and regret accrues against the best
// counterfactual arm (evaluated exactly, the plant is noiseless). Numerical
// failures abort the trial with a diagnostic.
TrialRecord run_synthetic_trial(const SyntheticSystem& system,
                                const std::vector<std::unique_ptr<DeformationModel>>& models,
                                Algorithm algorithm, const SyntheticTrialParams& params,
                                std::mt19937_64& selection_rng);

// Selection hook flavor. The hook also sees the per-arm counterfactual
// rewards so tests can express oracle selectors; the observe hook returns the
// eta value to record for the step.
using TrialSelectFn = std::function<int(const Eigen::VectorXd& arm_rewards, std::mt19937_64& rng)>;
using TrialObserveFn =
    std::function<double(const RewardObservation& obs, const Eigen::MatrixXd* similarity)>;

TrialRecord run_synthetic_trial(const SyntheticSystem& system,
                                const std::vector<std::unique_ptr<DeformationModel>>& models,
                                const TrialSelectFn& select, const TrialObserveFn& observe,
                                bool wants_similarity, const SyntheticTrialParams& params,
                                std::mt19937_64& selection_rng);

struct BenchmarkPreset
{
  std::string name = "small";
  int arms = 10;   // M
  int rows = 3;    // n
  int cols = 2;    // m
  int pulls = 1000;
  double v_max = 0.1;
  double system_noise = 0.1;
  // The regret benchmarks draw candidate models at 2.5x the plant noise; the
  // reference regret totals are only reproducible at this scale.
  double model_noise = 0.25;

  // small (10, 3, 2), medium (60, 147, 6), large (60, 6075, 12); throws
  // std::invalid_argument on anything else.
  static BenchmarkPreset named(const std::string& name);
};

struct AlgorithmSummary
{
  Algorithm algorithm = Algorithm::ucb1_normal;
  int runs = 0;
  double mean_total_regret = 0.0;
  double std_total_regret = 0.0;  // sample standard deviation, n - 1
};

struct BenchmarkResult
{
  std::vector<AlgorithmSummary> summaries;        // one per requested algorithm
  std::vector<std::vector<TrialRecord>> records;  // [algorithm][run]
};

// Runs `runs` independent trials per algorithm. Run i derives its environment
// streams from seed + i (tags "system" and "models", so every algorithm sees
// the bitwise-identical plant and model set) and its selection stream from
// seed + i + 2^31 tagged with the algorithm name. Trials are distributed over
// up to `jobs` threads; summaries reduce in run order, so results do not
// depend on the thread count.
BenchmarkResult run_benchmark(const BenchmarkPreset& preset,
                              const std::vector<Algorithm>& algorithms, int runs,
                              std::uint64_t seed, const BanditParams& bandit, int jobs);
}
