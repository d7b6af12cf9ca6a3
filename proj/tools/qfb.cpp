// Copyright 2026 The qfeedback Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: train, eval, compare, degeneracy.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfb/experiment.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kNumericalError = 3;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override a config key, e.g. --set gass.iterations=10");
}

struct EvalArgs {
  std::optional<std::string> checkpoint;
  std::optional<std::size_t> n_traj;
  std::optional<std::size_t> horizon;
};

void add_eval_args(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--checkpoint", a.checkpoint, "Checkpoint directory (default <output_dir>/checkpoint)");
  cmd->add_option("--n-traj", a.n_traj, "Number of test trajectories")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", a.horizon, "Evaluation horizon in steps")->check(CLI::PositiveNumber);
}

qfb::EvalOptions to_options(const EvalArgs& a) {
  qfb::EvalOptions o;
  if (a.checkpoint) o.checkpoint = *a.checkpoint;
  o.n_trajectories = a.n_traj;
  o.horizon = a.horizon;
  return o;
}

std::vector<double> parse_gains(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw qfb::ConfigError("bad gain list '" + text + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qfb: feedback policy training for continuously measured quantum systems"};
  app.require_subcommand(1);

  Common train_c, eval_c, compare_c, degen_c;
  bool resume = false;
  EvalArgs eval_a, compare_a;
  bool eval_baseline = false;
  std::optional<std::string> gain_fidelity, gain_gradient;

  CLI::App* train = app.add_subcommand("train", "Optimize a policy and write stats and a checkpoint");
  add_common(train, train_c);
  train->add_flag("--resume", resume, "Continue from <output_dir>/checkpoint");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate the trained mean policy on unseen noise");
  add_common(eval, eval_c);
  add_eval_args(eval, eval_a);
  eval->add_flag("--baseline", eval_baseline, "Evaluate the configured baseline controller instead");

  CLI::App* compare = app.add_subcommand("compare", "Trained policy versus baseline on identical noise");
  add_common(compare, compare_c);
  add_eval_args(compare, compare_a);
  compare->add_option("--gain-fidelity", gain_fidelity, "Baseline fidelity gains, comma separated");
  compare->add_option("--gain-gradient", gain_gradient, "Baseline gradient gains, comma separated");

  CLI::App* degeneracy = app.add_subcommand("degeneracy", "Report back-action degeneracy of the system");
  add_common(degeneracy, degen_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (train->parsed()) {
      const auto cfg = qfb::load_config(train_c.config, train_c.overrides);
      const auto out = qfb::run_train(cfg, resume, &std::cerr);
      std::cout << out.stats_csv.string() << '\n' << out.checkpoint_dir.string() << '\n';
    } else if (eval->parsed()) {
      auto options = to_options(eval_a);
      options.baseline = eval_baseline;
      qfb::run_eval(qfb::load_config(eval_c.config, eval_c.overrides), options, &std::cerr);
    } else if (compare->parsed()) {
      const auto cfg = qfb::load_config(compare_c.config, compare_c.overrides);
      const qfb::QndSystem sys = qfb::build_system(cfg);
      qfb::ExperimentConfig gains = cfg;
      if (gain_fidelity) gains.baseline.gain_fidelity = parse_gains(*gain_fidelity);
      if (gain_gradient) gains.baseline.gain_gradient = parse_gains(*gain_gradient);
      const auto report = qfb::run_compare(cfg, to_options(compare_a), qfb::build_baseline(gains, sys), &std::cerr);
      std::cout << report.json.dump(2) << '\n';
    } else if (degeneracy->parsed()) {
      std::cout << qfb::run_degeneracy(qfb::load_config(degen_c.config, degen_c.overrides)).dump(2) << '\n';
    }
  } catch (const qfb::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const qfb::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
