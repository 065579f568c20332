#include "banditservo/synthetic.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "banditservo/parallel.hpp"
#include "banditservo/rng.hpp"

namespace banditservo
{
namespace
{
void addUniformNoise(Eigen::MatrixXd& J, double noise, std::mt19937_64& rng)
{
  assert(noise >= 0.0);
  std::uniform_real_distribution<double> uniform(-noise, noise);
  for (Eigen::Index col = 0; col < J.cols(); col++)
  {
    for (Eigen::Index row = 0; row < J.rows(); row++)
    {
      J(row, col) += uniform(rng);
    }
  }
}
}

SyntheticSystem make_synthetic_system(int n, int m, std::mt19937_64& rng, double noise)
{
  if (m >= n || m < 1)
  {
    throw std::invalid_argument("make_synthetic_system: need 1 <= m < n");
  }
  SyntheticSystem system;
  system.n = n;
  system.m = m;
  system.J_true = Eigen::MatrixXd::Zero(n, m);
  system.J_true.topRows(m) = Eigen::MatrixXd::Identity(m, m);
  addUniformNoise(system.J_true, noise, rng);
  system.y = Eigen::VectorXd::Constant(n, 10.0);
  return system;
}

std::vector<std::unique_ptr<DeformationModel>> make_synthetic_models(const SyntheticSystem& system,
                                                                     int count,
                                                                     std::mt19937_64& rng,
                                                                     double noise)
{
  ModelSetConfig config;
  config.constant_jacobians.reserve(count);
  for (int i = 0; i < count; i++)
  {
    Eigen::MatrixXd J = system.J_true;
    addUniformNoise(J, noise, rng);
    config.constant_jacobians.push_back(std::move(J));
  }
  return model_set_factory(config);
}

TrialRecord run_synthetic_trial(const SyntheticSystem& system,
                                const std::vector<std::unique_ptr<DeformationModel>>& models,
                                Algorithm algorithm, const SyntheticTrialParams& params,
                                std::mt19937_64& selection_rng)
{
  ArmSelector selector(algorithm, static_cast<int>(models.size()), params.bandit);
  const auto select = [&selector](const Eigen::VectorXd&, std::mt19937_64& rng)
  {
    return selector.select(rng);
  };
  const auto observe = [&selector](const RewardObservation& obs, const Eigen::MatrixXd* similarity)
  {
    selector.observe(obs, similarity);
    return selector.eta();
  };
  return run_synthetic_trial(system, models, select, observe, selector.needsSimilarity(), params,
                             selection_rng);
}

TrialRecord run_synthetic_trial(const SyntheticSystem& system,
                                const std::vector<std::unique_ptr<DeformationModel>>& models,
                                const TrialSelectFn& select, const TrialObserveFn& observe,
                                bool wants_similarity, const SyntheticTrialParams& params,
                                std::mt19937_64& selection_rng)
{
  if (params.pulls < 1)
  {
    throw std::invalid_argument("run_synthetic_trial: pulls must be >= 1");
  }
  if (system.n % 3 != 0)
  {
    // The command solver weights cover one 3-vector of rows each.
    throw std::invalid_argument("run_synthetic_trial: n must be divisible by 3");
  }
  assert(!models.empty());

  const int arms = static_cast<int>(models.size());
  const Eigen::VectorXd weights = Eigen::VectorXd::Ones(system.n / 3);

  TrialRecord record;
  record.steps.reserve(params.pulls);
  Eigen::VectorXd y = system.y;
  std::vector<Eigen::VectorXd> commands(arms);
  Eigen::VectorXd arm_rewards(arms);
  double regret = 0.0;

  try
  {
    for (int pull = 0; pull < params.pulls; pull++)
    {
      const double error_before = y.norm();
      for (int m = 0; m < arms; m++)
      {
        commands[m] = models[m]->command(-y, weights, params.v_max);
        arm_rewards(m) = error_before - (y + system.J_true * commands[m]).norm();
      }

      const int arm = select(arm_rewards, selection_rng);
      assert(arm >= 0 && arm < arms);
      const double reward = arm_rewards(arm);
      const double best = arm_rewards.maxCoeff();

      Eigen::MatrixXd similarity;
      if (wants_similarity)
      {
        similarity = vector_similarity_matrix(commands);
      }

      y += system.J_true * commands[arm];
      const double eta = observe({arm, reward}, wants_similarity ? &similarity : nullptr);
      regret += best - reward;
      record.steps.push_back({arm, reward, best, error_before, eta, regret});
    }
  }
  catch (const std::exception& e)
  {
    record.aborted = true;
    record.diagnostic = e.what();
  }
  record.total_regret = regret;
  return record;
}

BenchmarkPreset BenchmarkPreset::named(const std::string& name)
{
  BenchmarkPreset preset;
  preset.name = name;
  if (name == "small")
  {
    preset.arms = 10;
    preset.rows = 3;
    preset.cols = 2;
  }
  else if (name == "medium")
  {
    preset.arms = 60;
    preset.rows = 147;
    preset.cols = 6;
  }
  else if (name == "large")
  {
    preset.arms = 60;
    preset.rows = 6075;
    preset.cols = 12;
  }
  else
  {
    throw std::invalid_argument("unknown preset: " + name +
                                " (expected small, medium, or large)");
  }
  return preset;
}

BenchmarkResult run_benchmark(const BenchmarkPreset& preset,
                              const std::vector<Algorithm>& algorithms, int runs,
                              std::uint64_t seed, const BanditParams& bandit, int jobs)
{
  assert(runs >= 1 && jobs >= 1);
  BenchmarkResult result;
  result.records.resize(algorithms.size());
  for (auto& per_algorithm : result.records)
  {
    per_algorithm.resize(runs);
  }

  SyntheticTrialParams trial_params;
  trial_params.pulls = preset.pulls;
  trial_params.v_max = preset.v_max;
  trial_params.bandit = bandit;

  parallel_for_index(runs, jobs, [&](int run)
  {
    const uint64_t run_seed = seed + static_cast<uint64_t>(run);
    auto system_rng = make_stream(run_seed, "system");
    const SyntheticSystem system =
        make_synthetic_system(preset.rows, preset.cols, system_rng, preset.system_noise);
    for (size_t a = 0; a < algorithms.size(); a++)
    {
      // Fresh stream per algorithm: the model set is bitwise identical for
      // all of them within a run.
      auto models_rng = make_stream(run_seed, "models");
      const auto models =
          make_synthetic_models(system, preset.arms, models_rng, preset.model_noise);
      auto selection_rng = make_stream(run_seed + (1ULL << 31), to_string(algorithms[a]));
      result.records[a][run] =
          run_synthetic_trial(system, models, algorithms[a], trial_params, selection_rng);
    }
  });

  result.summaries.reserve(algorithms.size());
  for (size_t a = 0; a < algorithms.size(); a++)
  {
    // Welford in run order, independent of which thread finished when.
    double mean = 0.0;
    double m2 = 0.0;
    for (int run = 0; run < runs; run++)
    {
      const double x = result.records[a][run].total_regret;
      const double delta = x - mean;
      mean += delta / static_cast<double>(run + 1);
      m2 += delta * (x - mean);
    }
    AlgorithmSummary summary;
    summary.algorithm = algorithms[a];
    summary.runs = runs;
    summary.mean_total_regret = mean;
    summary.std_total_regret = runs > 1 ? std::sqrt(m2 / static_cast<double>(runs - 1)) : 0.0;
    result.summaries.push_back(summary);
  }
  return result;
}
}
