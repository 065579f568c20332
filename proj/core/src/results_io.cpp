#include "banditservo/results_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace banditservo
{
namespace
{
std::string formatDouble(double value)
{
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::ofstream openOrThrow(const std::filesystem::path& file)
{
  std::ofstream out(file, std::ios::binary);
  if (!out)
  {
    throw std::runtime_error("write_results: cannot open " + file.string());
  }
  return out;
}

void finishOrThrow(std::ofstream& out, const std::filesystem::path& file)
{
  out.flush();
  if (!out)
  {
    throw std::runtime_error("write_results: write failed for " + file.string());
  }
}
}

std::vector<StepRow> benchmark_step_rows(const BenchmarkResult& result,
                                         const std::vector<Algorithm>& algorithms)
{
  std::vector<StepRow> rows;
  if (result.records.empty())
  {
    return rows;
  }
  const size_t runs = result.records.front().size();
  for (size_t run = 0; run < runs; run++)
  {
    for (size_t a = 0; a < algorithms.size(); a++)
    {
      const TrialRecord& record = result.records[a][run];
      for (size_t s = 0; s < record.steps.size(); s++)
      {
        const TrialStep& step = record.steps[s];
        rows.push_back({static_cast<int>(run), algorithms[a], static_cast<int>(s) + 1, step.arm,
                        step.reward, step.best_reward, step.error, step.eta, step.cum_regret});
      }
    }
  }
  return rows;
}

std::vector<SummaryRow> benchmark_summary_rows(const BenchmarkResult& result,
                                               const std::string& preset_name)
{
  std::vector<SummaryRow> rows;
  rows.reserve(result.summaries.size());
  for (const AlgorithmSummary& summary : result.summaries)
  {
    rows.push_back({preset_name, summary.algorithm, summary.runs, summary.mean_total_regret,
                    summary.std_total_regret});
  }
  return rows;
}

void write_results(const std::vector<StepRow>& steps, const std::vector<SummaryRow>& summary,
                   const RunConfig& config, const std::string& path)
{
  const std::filesystem::path dir(path);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
  {
    throw std::runtime_error("write_results: cannot create " + dir.string() + ": " +
                             ec.message());
  }

  {
    const std::filesystem::path file = dir / "steps.csv";
    std::ofstream out = openOrThrow(file);
    out << "run,algorithm,step,arm,reward,best_reward,error,eta,cum_regret\n";
    for (const StepRow& row : steps)
    {
      out << row.run << ',' << to_string(row.algorithm) << ',' << row.step << ',' << row.arm
          << ',' << formatDouble(row.reward) << ',' << formatDouble(row.best_reward) << ','
          << formatDouble(row.error) << ',' << formatDouble(row.eta) << ','
          << formatDouble(row.cum_regret) << '\n';
    }
    finishOrThrow(out, file);
  }

  {
    const std::filesystem::path file = dir / "summary.csv";
    std::ofstream out = openOrThrow(file);
    out << "preset,algorithm,runs,mean_total_regret,std_total_regret\n";
    for (const SummaryRow& row : summary)
    {
      out << row.preset << ',' << to_string(row.algorithm) << ',' << row.runs << ','
          << formatDouble(row.mean_total_regret) << ',' << formatDouble(row.std_total_regret)
          << '\n';
    }
    finishOrThrow(out, file);
  }

  {
    const std::filesystem::path file = dir / "manifest.json";
    std::ofstream out = openOrThrow(file);
    nlohmann::json manifest;
    manifest["config"] = nlohmann::json::parse(serialize_config(config));
    manifest["seeds"]["base"] = config.seed;
    manifest["seeds"]["environment"] = "base + run, stream tags 'system' and 'models'";
    manifest["seeds"]["selection"] = "base + run + 2^31, stream tag = algorithm name";
    out << manifest.dump(2) << '\n';
    finishOrThrow(out, file);
  }
}
}
