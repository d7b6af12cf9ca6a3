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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfb/batch.hpp"
#include "qfb/config.hpp"
#include "qfb/serialize.hpp"

namespace qfb {

/// Scalar summary of one evaluated controller.
struct ArmReport {
  std::string name;
  EnsembleCurves curves;
  double final_fidelity_mean = 0.0;
  double final_fidelity_sd = 0.0;
  double jstate_mean = 0.0;
  double jstate_sd = 0.0;
  double jcontrol_mean = 0.0;
  double jcontrol_sd = 0.0;
  /// First grid time at which the mean fidelity reaches 0.9.
  std::optional<double> time_to_fidelity;
};

ArmReport summarize_arm(std::string name, EnsembleCurves curves, double fidelity_threshold = 0.9);

/// Evaluation noise: eval_* seed domains, disjoint from every training stream.
/// `block` separates independent evaluation sets (0 for eval and compare).
BatchProblem evaluation_problem(const QndSystem& sys, const CostSpec& cost, const SimConfig& sim,
                                std::uint64_t master_seed, const InitialStateSource& initial,
                                std::uint64_t block = 0);

struct TrainOutcome {
  Checkpoint checkpoint;
  std::vector<IterationStats> stats;
  std::filesystem::path stats_csv;
  std::filesystem::path checkpoint_dir;
  double wall_seconds = 0.0;
};

/// Runs the optimizer and writes train_stats.csv, train_timing.json and
/// checkpoint/ under cfg.output_dir. With `resume`, continues from the
/// stored checkpoint and keeps the matching CSV prefix.
TrainOutcome run_train(const ExperimentConfig& cfg, bool resume = false, std::ostream* log = nullptr);

struct EvalOptions {
  /// Checkpoint directory; defaults to <output_dir>/checkpoint.
  std::optional<std::filesystem::path> checkpoint;
  /// Evaluate the configured baseline instead of a trained policy.
  bool baseline = false;
  std::optional<std::size_t> n_trajectories;
  std::optional<std::size_t> horizon;
};

/// Writes eval_basis.csv, eval_costs.csv, eval_fidelity.csv and eval_summary.json.
ArmReport run_eval(const ExperimentConfig& cfg, const EvalOptions& options, std::ostream* log = nullptr);

struct CompareReport {
  ArmReport trained;
  ArmReport baseline;
  double effort_ratio = 0.0;
  nlohmann::json json;
};

/// Both controllers on the same noise and initial states. The effort ratio
/// is baseline J_control over trained J_control at the final time.
CompareReport compare_controllers(const BatchProblem& problem, const Controller& trained,
                                  const Controller& baseline, FeatureMap features,
                                  std::size_t n_trajectories, std::size_t stride = 1);

/// Evaluates the trained mean policy and the baseline on identical noise and
/// initial states; writes compare.json, compare_costs.csv and one basis CSV per arm.
CompareReport run_compare(const ExperimentConfig& cfg, const EvalOptions& options,
                          const BaselineSpec& baseline, std::ostream* log = nullptr);

/// Degeneracy of the measurement back-action at the target, the maximally
/// mixed state and every basis projector (plus a superposition test state
/// for non-qubit systems). Writes degeneracy.json.
nlohmann::json run_degeneracy(const ExperimentConfig& cfg);

/// Shortest round-trip decimal representation.
std::string format_number(double value);

}  // namespace qfb
