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
#include <optional>
#include <vector>

#include "qfb/controller.hpp"
#include "qfb/cost.hpp"
#include "qfb/policy.hpp"
#include "qfb/rng.hpp"
#include "qfb/simulator.hpp"
#include "qfb/systems.hpp"

namespace qfb {

/// Where rollout initial states come from: one fixed state, or a fresh Haar
/// random pure state per (iteration, rollout).
class InitialStateSource {
 public:
  static InitialStateSource fixed(DensityState state);
  static InitialStateSource random_pure(Eigen::Index dim);

  DensityState state(const SeedSpec& seed, StreamDomain domain, std::uint64_t iteration,
                     std::uint64_t rollout) const;
  bool is_random() const { return !fixed_.has_value(); }

 private:
  std::optional<DensityState> fixed_;
  Eigen::Index dim_ = 0;
};

/// Everything a batch of rollouts shares. Rollout r of the batch uses the
/// Wiener stream (iteration, 0, r) and the initial state for (iteration, r)
/// no matter which controller it runs: common random numbers across the P
/// candidates of one iteration.
struct BatchProblem {
  const QndSystem* system = nullptr;
  const CostSpec* cost = nullptr;
  SimConfig sim;
  SeedSpec seed;
  std::uint64_t iteration = 0;
  InitialStateSource initial = InitialStateSource::random_pure(0);
  StreamDomain noise_domain = StreamDomain::wiener;
  StreamDomain initial_domain = StreamDomain::initial_state;
};

NoiseStream rollout_noise(const BatchProblem& problem, std::uint64_t rollout);

/// Number of OpenMP workers; QFB_NUM_THREADS overrides the OpenMP default.
int worker_threads();

/// P x R matrix of total costs J_{r,p} (row p, column r). OpenMP-parallel over
/// (p, r); each entry depends only on its own seeds, so the result is
/// identical to the serial kernel bit for bit.
Eigen::MatrixXd batch_costs(const BatchProblem& problem,
                            const std::vector<const Controller*>& controllers, std::size_t rollouts);

/// Full trajectories, p-major (index p * R + r).
std::vector<Trajectory> batch_rollouts(const BatchProblem& problem,
                                       const std::vector<const Controller*>& controllers,
                                       std::size_t rollouts);

/// Ensemble statistics of one controller over many rollouts, sampled every
/// `stride` steps plus the final time. Standard deviations are sample
/// (n - 1) estimates.
struct EnsembleCurves {
  std::vector<double> time;
  /// Rows are time points, columns features.
  Eigen::MatrixXd feature_mean;
  Eigen::MatrixXd feature_sd;
  RealVector fidelity_mean, fidelity_sd;
  /// Cumulative running costs; both start at 0.
  RealVector jstate_mean, jstate_sd;
  RealVector jcontrol_mean, jcontrol_sd;
  /// Mean of the unweighted effort sum_j int u_j^2 dt over [0, T].
  double effort_mean = 0.0;
  std::size_t n_trajectories = 0;
};

/// Trajectories per reduction chunk. Chunks are summed in index order, so
/// the result does not depend on the number of threads.
inline constexpr std::size_t kStatsChunk = 32;

EnsembleCurves ensemble_statistics(const BatchProblem& problem, const Controller& controller,
                                   FeatureMap features, std::size_t n_trajectories,
                                   std::size_t stride = 1);

namespace reference {

EnsembleCurves ensemble_statistics_serial(const BatchProblem& problem, const Controller& controller,
                                          FeatureMap features, std::size_t n_trajectories,
                                          std::size_t stride = 1);

/// Single-threaded versions of the batch kernels, kept for testing.
Eigen::MatrixXd batch_costs_serial(const BatchProblem& problem,
                                   const std::vector<const Controller*>& controllers,
                                   std::size_t rollouts);
std::vector<Trajectory> batch_rollouts_serial(const BatchProblem& problem,
                                              const std::vector<const Controller*>& controllers,
                                              std::size_t rollouts);

}  // namespace reference

}  // namespace qfb
