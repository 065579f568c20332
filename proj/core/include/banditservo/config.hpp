#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banditservo/bandits.hpp"
#include "banditservo/controller.hpp"
#include "banditservo/synthetic.hpp"

namespace banditservo
{
// Fully resolved run description. Field defaults below are the shared ones;
// parse_config overlays the per-command defaults (synthetic runs use
// v_max_e = 0.1 and unit noise factors, task runs use the table-coverage
// controller column with sigma_tr2 = 0.1, sigma_obs2 = 0.01).
struct RunConfig
{
  std::string command;  // synth | task | selftest

  // synth
  std::string preset = "small";
  int arms = 0;  // explicit dimensions; all three > 0 overrides the preset
  int rows = 0;
  int cols = 0;
  int pulls = 1000;

  // task
  std::string scenario = "chain-spread";
  int steps = 1000;

  // shared
  std::vector<Algorithm> algorithms = {Algorithm::ucb1_normal, Algorithm::kf_manb,
                                       Algorithm::kf_mandb};
  int runs = 100;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = "results";
  ControllerConfig controller;
  BanditParams bandit;

  // selftest
  bool list = false;
  std::vector<std::string> inject;

  bool operator==(const RunConfig&) const = default;
};

// Outcome of argument handling. exit_code -1 means "run with config";
// anything else is a terminal outcome (0 for help, 2 for usage errors) with
// the text to print in message.
struct ParseResult
{
  RunConfig config;
  int exit_code = -1;
  std::string message;
};

// args[0] is the program name. Precedence: command-line flags over --config
// file values over per-command defaults. The config file is flat JSON whose
// keys mirror the long flag names; unknown keys are rejected.
ParseResult parse_config(const std::vector<std::string>& args);

// Flat JSON document (sorted keys, trailing newline) holding every RunConfig
// field. parse_config(prog, config.command, "--config", <file with this
// content>) reproduces the config exactly.
std::string serialize_config(const RunConfig& config);

// Preset from the name, or a custom one when explicit dimensions are set;
// pulls and v_max_e come from the config either way.
BenchmarkPreset resolve_preset(const RunConfig& config);
}
