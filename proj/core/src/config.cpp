#include "banditservo/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

namespace banditservo
{
namespace
{
using nlohmann::json;

const std::vector<std::string> kCommands = {"synth", "task", "selftest"};
const std::vector<std::string> kScenarios = {"line-to-arc", "chain-spread",
                                             "chain-around-obstacle"};

// Input problems that should end with a usage message and exit code 2.
struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

void applyCommandDefaults(RunConfig& config)
{
  if (config.command == "synth")
  {
    config.controller.v_max_e = 0.1;
    config.bandit.sigma_tr2 = 1.0;
    config.bandit.sigma_obs2 = 1.0;
    config.runs = 100;
  }
  else if (config.command == "task")
  {
    // ControllerConfig defaults already hold the table-coverage column.
    config.bandit.sigma_tr2 = 0.1;
    config.bandit.sigma_obs2 = 0.01;
    config.runs = 1;
  }
}

std::vector<std::string> algorithmNames(const std::vector<Algorithm>& algorithms)
{
  std::vector<std::string> names;
  names.reserve(algorithms.size());
  for (const Algorithm algorithm : algorithms)
  {
    names.push_back(to_string(algorithm));
  }
  return names;
}

std::vector<Algorithm> algorithmsFromNames(const std::vector<std::string>& names)
{
  if (names.empty())
  {
    throw UsageError("algorithms: need at least one");
  }
  std::vector<Algorithm> algorithms;
  algorithms.reserve(names.size());
  for (const std::string& name : names)
  {
    try
    {
      algorithms.push_back(algorithm_from_string(name));
    }
    catch (const std::invalid_argument& e)
    {
      throw UsageError(std::string("algorithms: ") + e.what());
    }
  }
  const std::set<Algorithm> unique(algorithms.begin(), algorithms.end());
  if (unique.size() != algorithms.size())
  {
    throw UsageError("algorithms: duplicate entries");
  }
  return algorithms;
}

json configToJson(const RunConfig& config)
{
  json j;
  j["command"] = config.command;
  j["preset"] = config.preset;
  j["arms"] = config.arms;
  j["rows"] = config.rows;
  j["cols"] = config.cols;
  j["pulls"] = config.pulls;
  j["scenario"] = config.scenario;
  j["steps"] = config.steps;
  j["algorithms"] = algorithmNames(config.algorithms);
  j["runs"] = config.runs;
  j["seed"] = config.seed;
  j["jobs"] = config.jobs;
  j["out"] = config.out;
  j["c"] = config.controller.c;
  j["beta"] = config.controller.beta;
  j["lambda"] = config.controller.lambda;
  j["vmax-e"] = config.controller.v_max_e;
  j["vmax-o"] = config.controller.v_max_o;
  j["gripper-radius"] = config.controller.gripper_radius;
  j["xi"] = config.bandit.xi;
  j["sigma-tr2"] = config.bandit.sigma_tr2;
  j["sigma-obs2"] = config.bandit.sigma_obs2;
  j["list"] = config.list;
  j["inject"] = config.inject;
  return j;
}

void applyJsonConfig(RunConfig& config, const json& file)
{
  if (!file.is_object())
  {
    throw UsageError("config file: top level must be a JSON object");
  }
  for (const auto& [key, value] : file.items())
  {
    try
    {
      if (key == "command")
      {
        const auto name = value.get<std::string>();
        if (name != config.command)
        {
          throw UsageError("config file command '" + name + "' does not match subcommand '" +
                           config.command + "'");
        }
      }
      else if (key == "preset") config.preset = value.get<std::string>();
      else if (key == "arms") config.arms = value.get<int>();
      else if (key == "rows") config.rows = value.get<int>();
      else if (key == "cols") config.cols = value.get<int>();
      else if (key == "pulls") config.pulls = value.get<int>();
      else if (key == "scenario") config.scenario = value.get<std::string>();
      else if (key == "steps") config.steps = value.get<int>();
      else if (key == "algorithms")
        config.algorithms = algorithmsFromNames(value.get<std::vector<std::string>>());
      else if (key == "runs") config.runs = value.get<int>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "jobs") config.jobs = value.get<int>();
      else if (key == "out") config.out = value.get<std::string>();
      else if (key == "c") config.controller.c = value.get<double>();
      else if (key == "beta") config.controller.beta = value.get<double>();
      else if (key == "lambda") config.controller.lambda = value.get<double>();
      else if (key == "vmax-e") config.controller.v_max_e = value.get<double>();
      else if (key == "vmax-o") config.controller.v_max_o = value.get<double>();
      else if (key == "gripper-radius") config.controller.gripper_radius = value.get<double>();
      else if (key == "xi") config.bandit.xi = value.get<double>();
      else if (key == "sigma-tr2") config.bandit.sigma_tr2 = value.get<double>();
      else if (key == "sigma-obs2") config.bandit.sigma_obs2 = value.get<double>();
      else if (key == "list") config.list = value.get<bool>();
      else if (key == "inject") config.inject = value.get<std::vector<std::string>>();
      else throw UsageError("unknown config key: " + key);
    }
    catch (const json::exception& e)
    {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

void loadConfigFile(RunConfig& config, const std::string& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw UsageError("config file: cannot open " + path);
  }
  json file;
  try
  {
    in >> file;
  }
  catch (const json::exception& e)
  {
    throw UsageError("config file " + path + ": " + e.what());
  }
  applyJsonConfig(config, file);
}

void validate(const RunConfig& config)
{
  const auto require = [](bool ok, const std::string& message)
  {
    if (!ok)
    {
      throw UsageError(message);
    }
  };

  require(config.runs >= 1, "runs: must be >= 1");
  require(config.pulls >= 1, "pulls: must be >= 1");
  require(config.steps >= 1, "steps: must be >= 1");
  require(config.jobs >= 1, "jobs: must be >= 1");
  require(config.controller.beta > 0.0, "beta: must be > 0");
  require(config.controller.lambda >= 0.0, "lambda: must be >= 0");
  require(config.controller.c >= 0.0, "c: must be >= 0");
  require(config.controller.v_max_e > 0.0, "vmax-e: must be > 0");
  require(config.controller.v_max_o > 0.0, "vmax-o: must be > 0");
  require(config.controller.gripper_radius > 0.0, "gripper-radius: must be > 0");
  require(config.bandit.xi >= 0.0 && config.bandit.xi <= 1.0, "xi: must be in [0, 1]");
  require(config.bandit.sigma_tr2 > 0.0, "sigma-tr2: must be > 0");
  require(config.bandit.sigma_obs2 > 0.0, "sigma-obs2: must be > 0");

  if (config.command == "synth")
  {
    if (config.arms != 0 || config.rows != 0 || config.cols != 0)
    {
      require(config.arms > 0 && config.rows > 0 && config.cols > 0,
              "arms/rows/cols: set all three (positive) for custom dimensions");
      require(config.cols < config.rows, "cols: must be < rows");
      require(config.rows % 3 == 0, "rows: must be divisible by 3");
    }
    else
    {
      try
      {
        BenchmarkPreset::named(config.preset);
      }
      catch (const std::invalid_argument& e)
      {
        throw UsageError(std::string("preset: ") + e.what());
      }
    }
  }
  if (config.command == "task")
  {
    bool known = false;
    for (const std::string& scenario : kScenarios)
    {
      known = known || scenario == config.scenario;
    }
    require(known, "scenario: unknown name '" + config.scenario + "'");
  }
}
}

ParseResult parse_config(const std::vector<std::string>& args)
{
  ParseResult result;
  RunConfig& config = result.config;

  // The per-command defaults and any config file must be in place before
  // CLI11 assigns flag values, so the command and --config are pre-scanned.
  std::string config_path;
  for (size_t i = 1; i < args.size(); i++)
  {
    if (config.command.empty())
    {
      for (const std::string& command : kCommands)
      {
        if (args[i] == command)
        {
          config.command = command;
          applyCommandDefaults(config);
          break;
        }
      }
    }
    if (args[i] == "--config" && i + 1 < args.size())
    {
      config_path = args[i + 1];
    }
    else if (args[i].rfind("--config=", 0) == 0)
    {
      config_path = args[i].substr(9);
    }
  }

  try
  {
    if (!config_path.empty() && !config.command.empty())
    {
      loadConfigFile(config, config_path);
    }
  }
  catch (const UsageError& e)
  {
    result.exit_code = 2;
    result.message = e.what();
    return result;
  }

  std::vector<std::string> algorithm_names = algorithmNames(config.algorithms);

  CLI::App app{"Model-selection bandits driving a Jacobian servo controller"};
  app.require_subcommand(1);

  CLI::App* synth = app.add_subcommand("synth", "Synthetic linear-plant regret benchmark");
  CLI::App* task = app.add_subcommand("task", "Toy manipulation scenarios");
  CLI::App* selftest = app.add_subcommand("selftest", "Run the embedded invariant suite");

  for (CLI::App* cmd : {synth, task})
  {
    cmd->add_option("--config", config_path, "JSON config file, flat keys mirroring these flags");
    cmd->add_option("--algorithms", algorithm_names,
                    "comma-separated subset of ucb1-normal,kf-manb,kf-mandb")
        ->delimiter(',');
    cmd->add_option("--runs", config.runs, "independent trials per algorithm");
    cmd->add_option("--seed", config.seed, "base seed; run i uses seed + i");
    cmd->add_option("--jobs", config.jobs, "worker threads across runs");
    cmd->add_option("--out", config.out, "output directory for CSVs and manifest");
    cmd->add_option("--c", config.controller.c, "rotation weight in twist inner products");
    cmd->add_option("--beta", config.controller.beta, "obstacle repulsion falloff");
    cmd->add_option("--lambda", config.controller.lambda, "stretching threshold");
    cmd->add_option("--vmax-e", config.controller.v_max_e, "task command norm bound");
    cmd->add_option("--vmax-o", config.controller.v_max_o, "repulsion command norm bound");
    cmd->add_option("--gripper-radius", config.controller.gripper_radius,
                    "gripper sphere radius for proximity");
    cmd->add_option("--xi", config.bandit.xi, "similarity coupling strength");
    cmd->add_option("--sigma-tr2", config.bandit.sigma_tr2, "transition noise factor");
    cmd->add_option("--sigma-obs2", config.bandit.sigma_obs2, "observation noise factor");
  }
  synth->add_option("--preset", config.preset, "small | medium | large");
  synth->add_option("--arms", config.arms, "custom model count M");
  synth->add_option("--rows", config.rows, "custom state dimension n (divisible by 3)");
  synth->add_option("--cols", config.cols, "custom command dimension m < n");
  synth->add_option("--pulls", config.pulls, "pulls per trial");
  task->add_option("--scenario", config.scenario,
                   "line-to-arc | chain-spread | chain-around-obstacle");
  task->add_option("--steps", config.steps, "control steps per run");
  selftest->add_option("--config", config_path, "JSON config file");
  selftest->add_flag("--list", config.list, "print invariant names and exit");
  selftest->add_option("--inject", config.inject, "fault hooks; the suite must then fail")
      ->delimiter(',');

  try
  {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& arg : args)
    {
      argv.push_back(arg.c_str());
    }
    app.parse(static_cast<int>(argv.size()), argv.data());

    config.command = app.get_subcommands().front()->get_name();
    config.algorithms = algorithmsFromNames(algorithm_names);
    validate(config);
  }
  catch (const CLI::ParseError& e)
  {
    std::ostringstream out;
    std::ostringstream err;
    const int code = app.exit(e, out, err);
    result.exit_code = code == 0 ? 0 : 2;
    result.message = out.str() + err.str();
    if (result.exit_code == 2)
    {
      result.message += app.help();
    }
    return result;
  }
  catch (const UsageError& e)
  {
    result.exit_code = 2;
    result.message = e.what();
    return result;
  }
  return result;
}

std::string serialize_config(const RunConfig& config)
{
  return configToJson(config).dump(2) + "\n";
}

BenchmarkPreset resolve_preset(const RunConfig& config)
{
  BenchmarkPreset preset;
  if (config.arms > 0 && config.rows > 0 && config.cols > 0)
  {
    preset.name = "custom";
    preset.arms = config.arms;
    preset.rows = config.rows;
    preset.cols = config.cols;
  }
  else
  {
    preset = BenchmarkPreset::named(config.preset);
  }
  preset.pulls = config.pulls;
  preset.v_max = config.controller.v_max_e;
  return preset;
}
}
