#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "banditservo/config.hpp"
#include "banditservo/controller.hpp"
#include "banditservo/models.hpp"
#include "banditservo/parallel.hpp"
#include "banditservo/results_io.hpp"
#include "banditservo/rng.hpp"
#include "banditservo/selftest.hpp"
#include "banditservo/synthetic.hpp"
#include "banditservo/toy_world.hpp"

namespace
{
using namespace banditservo;

void printSummaryTable(const std::vector<SummaryRow>& rows)
{
  std::printf("%-24s %-12s %6s %18s %18s\n", "preset", "algorithm", "runs", "mean_total_regret",
              "std_total_regret");
  for (const SummaryRow& row : rows)
  {
    std::printf("%-24s %-12s %6d %18.6f %18.6f\n", row.preset.c_str(),
                to_string(row.algorithm).c_str(), row.runs, row.mean_total_regret,
                row.std_total_regret);
  }
}

int runSynth(const RunConfig& config)
{
  const BenchmarkPreset preset = resolve_preset(config);
  const BenchmarkResult result =
      run_benchmark(preset, config.algorithms, config.runs, config.seed, config.bandit, config.jobs);

  bool aborted = false;
  for (size_t a = 0; a < config.algorithms.size(); a++)
  {
    for (size_t run = 0; run < result.records[a].size(); run++)
    {
      const TrialRecord& record = result.records[a][run];
      if (!record.aborted)
        continue;
      std::fprintf(stderr, "run %zu (%s) aborted: %s\n", run,
                   to_string(config.algorithms[a]).c_str(), record.diagnostic.c_str());
      aborted = true;
    }
  }

  write_results(benchmark_step_rows(result, config.algorithms),
                benchmark_summary_rows(result, preset.name), config, config.out);
  printSummaryTable(benchmark_summary_rows(result, preset.name));
  std::printf("wrote %s/steps.csv, summary.csv, manifest.json\n", config.out.c_str());
  return aborted ? 1 : 0;
}

struct TaskTrial
{
  std::vector<StepRow> rows;
  double total_regret = 0.0;
  bool aborted = false;
  std::string diagnostic;
};

TaskTrial runTaskTrial(const RunConfig& config, Algorithm algorithm, int run)
{
  ToyWorld world = make_toy_world(config.scenario);

  ModelSetConfig model_config;
  model_config.distances = world.distances();
  model_config.initial_scene = world.scene();
  const auto models = model_set_factory(model_config);

  ArmSelector selector(algorithm, static_cast<int>(models.size()), config.bandit);
  auto rng = make_stream(config.seed + static_cast<uint64_t>(run) + (1ULL << 31),
                         to_string(algorithm));

  TaskTrial trial;
  double cum_regret = 0.0;
  for (int step = 1; step <= config.steps; step++)
  {
    const ToyWorld before = world;

    // Regret needs every arm's command, but the controller only solves for
    // all of them when the selector wants the similarity matrix. For the
    // other algorithms, reproduce the proposals from the pre-step state
    // (identical inputs, so identical commands) before the models learn from
    // this step.
    std::vector<RobotCommand> proposals;
    if (!selector.needsSimilarity())
    {
      const SceneState& scene = before.scene();
      const DesiredMotion error = error_correction(scene.object, before.targets());
      const DesiredMotion stretching =
          stretching_correction(before.distances(), config.controller.lambda, scene.object);
      const DesiredMotion desired = combine_terms(error, stretching);
      proposals.reserve(models.size());
      for (const auto& model : models)
      {
        model->setScene(scene);
        proposals.push_back(RobotCommand::fromStacked(
            model->command(desired.delta, desired.weights, config.controller.v_max_e)));
      }
    }

    const StepRecord record = main_loop_step(world, models, selector, rng, config.controller);
    if (record.aborted)
    {
      trial.aborted = true;
      trial.diagnostic = record.diagnostic;
      break;
    }
    if (selector.needsSimilarity())
      proposals = record.proposals;

    double best_reward = record.reward;
    for (const RobotCommand& proposal : proposals)
    {
      const RobotCommand safe = obstacle_repulsion(
          proposal, before.obstacles(), before.scene().grippers, config.controller.beta,
          config.controller.v_max_o, config.controller.gripper_radius);
      best_reward = std::max(best_reward, counterfactual_reward(before, safe));
    }
    cum_regret += best_reward - record.reward;

    StepRow row;
    row.run = run;
    row.algorithm = algorithm;
    row.step = step;
    row.arm = record.arm;
    row.reward = record.reward;
    row.best_reward = best_reward;
    row.error = record.error_before;
    row.eta = record.eta;
    row.cum_regret = cum_regret;
    trial.rows.push_back(row);
  }
  trial.total_regret = cum_regret;
  return trial;
}

int runTask(const RunConfig& config)
{
  std::vector<std::vector<TaskTrial>> trials(config.algorithms.size(),
                                             std::vector<TaskTrial>(config.runs));
  parallel_for_index(config.runs, config.jobs, [&](int run) {
    for (size_t a = 0; a < config.algorithms.size(); a++)
      trials[a][static_cast<size_t>(run)] = runTaskTrial(config, config.algorithms[a], run);
  });

  bool aborted = false;
  std::vector<StepRow> rows;
  for (int run = 0; run < config.runs; run++)
  {
    for (size_t a = 0; a < config.algorithms.size(); a++)
    {
      const TaskTrial& trial = trials[a][static_cast<size_t>(run)];
      if (trial.aborted)
      {
        std::fprintf(stderr, "run %d (%s) aborted: %s\n", run,
                     to_string(config.algorithms[a]).c_str(), trial.diagnostic.c_str());
        aborted = true;
      }
      rows.insert(rows.end(), trial.rows.begin(), trial.rows.end());
    }
  }

  std::vector<SummaryRow> summary;
  for (size_t a = 0; a < config.algorithms.size(); a++)
  {
    double mean = 0.0;
    double m2 = 0.0;
    int n = 0;
    for (const TaskTrial& trial : trials[a])
    {
      n++;
      const double delta = trial.total_regret - mean;
      mean += delta / n;
      m2 += delta * (trial.total_regret - mean);
    }
    SummaryRow row;
    row.preset = config.scenario;
    row.algorithm = config.algorithms[a];
    row.runs = n;
    row.mean_total_regret = mean;
    row.std_total_regret = n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0;
    summary.push_back(row);
  }

  write_results(rows, summary, config, config.out);
  printSummaryTable(summary);
  std::printf("wrote %s/steps.csv, summary.csv, manifest.json\n", config.out.c_str());
  return aborted ? 1 : 0;
}
}  // namespace

int main(int argc, char** argv)
{
  const std::vector<std::string> args(argv, argv + argc);
  const ParseResult parsed = parse_config(args);
  if (parsed.exit_code == 0)
  {
    std::cout << parsed.message;
    return 0;
  }
  if (parsed.exit_code > 0)
  {
    std::cerr << parsed.message;
    return parsed.exit_code;
  }

  const RunConfig& config = parsed.config;
  try
  {
    if (config.command == "selftest")
    {
      SelftestOptions options;
      options.list = config.list;
      options.inject = config.inject;
      return selftest(options, std::cout);
    }
    if (config.command == "synth")
      return runSynth(config);
    if (config.command == "task")
      return runTask(config);
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "unknown command: " << config.command << "\n";
  return 2;
}
