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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfb/baseline.hpp"
#include "qfb/batch.hpp"
#include "qfb/cost.hpp"
#include "qfb/gass.hpp"
#include "qfb/policy.hpp"
#include "qfb/simulator.hpp"
#include "qfb/systems.hpp"

namespace qfb {

/// Invalid configuration file, unknown key or bad override.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SystemSection {
  /// "two_qubit" or "homodyne".
  std::string kind = "two_qubit";
  double eta = 1.0;
  double gamma = 1.0;
  /// Homodyne only.
  std::size_t n_levels = 8;
  double omega = 1.0;
  /// Homodyne drive quadratures: "x" = a + a^+, "p" = i(a^+ - a).
  std::vector<std::string> controls{"x"};
};

struct PolicySection {
  PolicyKind kind = PolicyKind::linear;
  /// Defaults to pauli for qubit registers and raw_entries otherwise.
  std::optional<FeatureMap> feature_map;
  std::vector<std::size_t> hidden_widths;
};

struct CostSection {
  /// "bell_psi_plus", "maximally_mixed" or "basis:<k>"; empty picks the
  /// system default (Bell state for two qubits, ground state otherwise).
  std::string target;
  double state_weight = 1.0;
  /// One entry per control channel; a single entry is broadcast.
  std::vector<double> control_weights{0.01};
  double q_alpha = 1.0;
  double q_beta = 9.0;
  double terminal_weight = 0.0;
};

struct GassSection {
  std::size_t iterations = 850;
  std::size_t param_samples = 200;
  std::size_t rollouts = 50;
  double step_size = 1.0;
  double step_decay = 1.0;
  double kappa = 1.0;
  double sigma = 0.1;
  double sigma_decay = 1.0;
  SamplingScheme sampling = SamplingScheme::mirrored;
  std::uint64_t master_seed = 0;
  /// Write a checkpoint every this many iterations (0: only at the end).
  std::size_t checkpoint_every = 10;
  /// Evaluate the mean policy on held-out noise every this many iterations
  /// (0 disables the test_fidelity column).
  std::size_t test_every = 0;
  std::size_t test_trajectories = 64;
};

struct SimSection {
  double dt = 1e-3;
  std::size_t n_steps = 1000;
  /// Evaluation horizon in steps; 0 means n_steps.
  std::size_t eval_steps = 0;
  std::size_t n_eval_trajectories = 1000;
  /// Keep every k-th time point in evaluation curves.
  std::size_t record_stride = 1;
  bool renormalize = true;
  bool psd_projection = true;
  /// "random_pure", "maximally_mixed", "target" or "basis:<k>".
  std::string initial_state = "random_pure";
};

struct BaselineSection {
  /// Broadcast when a single value is given.
  std::vector<double> gain_fidelity{2.0};
  std::vector<double> gain_gradient{0.0};
};

struct ExperimentConfig {
  SystemSection system;
  PolicySection policy;
  CostSection cost;
  GassSection gass;
  SimSection sim;
  BaselineSection baseline;
  std::string output_dir = "runs/default";

  nlohmann::json to_json() const;
};

/// Parses and validates; every section and key is optional but unknown keys
/// are rejected.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Applies one "dotted.key=value" override. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

QndSystem build_system(const ExperimentConfig& cfg);
DensityState build_target(const ExperimentConfig& cfg, const QndSystem& sys);
CostSpec build_cost(const ExperimentConfig& cfg, const QndSystem& sys);
PolicySpec build_policy_spec(const ExperimentConfig& cfg, const QndSystem& sys);
GassConfig build_gass(const ExperimentConfig& cfg);
SimConfig build_sim(const ExperimentConfig& cfg, std::size_t n_steps);
BaselineSpec build_baseline(const ExperimentConfig& cfg, const QndSystem& sys);
InitialStateSource build_initial(const ExperimentConfig& cfg, const QndSystem& sys);

}  // namespace qfb
