#pragma once

#include <string>
#include <vector>

#include "banditservo/config.hpp"
#include "banditservo/synthetic.hpp"

namespace banditservo
{
struct StepRow
{
  int run = 0;
  Algorithm algorithm = Algorithm::ucb1_normal;
  int step = 0;  // 1-based pull index
  int arm = 0;
  double reward = 0.0;
  double best_reward = 0.0;
  double error = 0.0;
  double eta = 0.0;
  double cum_regret = 0.0;
};

struct SummaryRow
{
  std::string preset;
  Algorithm algorithm = Algorithm::ucb1_normal;
  int runs = 0;
  double mean_total_regret = 0.0;
  double std_total_regret = 0.0;
};

// Flattens benchmark records in (run, algorithm, step) order, matching the
// order write_results expects.
std::vector<StepRow> benchmark_step_rows(const BenchmarkResult& result,
                                         const std::vector<Algorithm>& algorithms);

std::vector<SummaryRow> benchmark_summary_rows(const BenchmarkResult& result,
                                               const std::string& preset_name);

// Writes steps.csv, summary.csv, and manifest.json into directory `path`
// (created if needed). CSVs use LF endings and 17-significant-digit floats,
// so identical inputs produce byte-identical files. The manifest holds the
// resolved config plus the seed derivation. Throws std::runtime_error naming
// the path on I/O failure.
void write_results(const std::vector<StepRow>& steps, const std::vector<SummaryRow>& summary,
                   const RunConfig& config, const std::string& path);
}
