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
#include <functional>
#include <vector>

#include "qfb/batch.hpp"
#include "qfb/cost.hpp"
#include "qfb/policy.hpp"
#include "qfb/rng.hpp"

namespace qfb {

/// Gaussian N(mu, diag(sigma^2)) over policy parameters.
struct SamplingDistribution {
  RealVector mu;
  RealVector sigma;

  void validate() const;
};

enum class SamplingScheme {
  /// P independent draws.
  iid,
  /// Antithetic pairs mu +- sigma z; an odd last sample is drawn unpaired.
  mirrored,
};

std::string to_string(SamplingScheme scheme);
SamplingScheme parse_sampling_scheme(const std::string& name);

struct GassConfig {
  std::size_t iterations = 850;
  std::size_t param_samples = 200;
  std::size_t rollouts = 50;
  /// gamma_k = step_size * step_decay^k.
  double step_size = 1.0;
  double step_decay = 1.0;
  ShapeSpec shape;
  /// sigma_k = sigma_0 * sigma_decay^k.
  double sigma_decay = 1.0;
  SamplingScheme sampling = SamplingScheme::mirrored;
  SeedSpec seed;

  void validate() const;
};

struct IterationStats {
  std::size_t iteration = 0;
  double mean_cost = 0.0;
  /// Smallest per-candidate mean cost.
  double best_cost = 0.0;
  double ess = 0.0;
  double update_norm = 0.0;
  double step_size = 0.0;
  /// Candidates whose averaged shape value underflowed to 0.
  std::size_t underflowed = 0;
  double wall_seconds = 0.0;
};

/// phi_p = mu + sigma (.) z_p with z_p drawn from stream (iteration, p).
std::vector<ParamVector> sample_params(const SamplingDistribution& dist, std::size_t count,
                                       const SeedSpec& seed, std::uint64_t iteration,
                                       SamplingScheme scheme = SamplingScheme::iid);

/// Normalized candidate weights w_p from the P x R cost matrix:
///   S_p = (1/R) sum_r exp(-kappa J_{r,p}),  w_p = S_p / sum_q S_q.
/// Costs are shifted by the global minimum before exponentiation, which
/// leaves w unchanged and keeps at least one S_p at or above 1/R.
RealVector shape_weights(const Eigen::MatrixXd& costs, const ShapeSpec& shape,
                         std::size_t* underflowed = nullptr);

double effective_sample_size(const RealVector& weights);

/// mu' = mu + step * sum_p w_p (phi_p - mu); sigma unchanged.
SamplingDistribution mean_update(const SamplingDistribution& dist,
                                 const std::vector<ParamVector>& samples, const RealVector& weights,
                                 double step);

/// Score-function estimate of grad_mu log <S>:  sum_p w_p Sigma^{-1} (phi_p - mu).
RealVector gradient_estimate(const Eigen::MatrixXd& costs, const std::vector<ParamVector>& samples,
                             const SamplingDistribution& dist, const ShapeSpec& shape);

/// Cost oracle for one optimizer iteration: a P x R matrix of J_{r,p}.
class BatchObjective {
 public:
  virtual ~BatchObjective() = default;
  virtual Eigen::MatrixXd evaluate(std::uint64_t iteration,
                                   const std::vector<ParamVector>& samples) = 0;
};

/// Closed-loop SME rollouts of a policy architecture.
class PolicyObjective final : public BatchObjective {
 public:
  PolicyObjective(const QndSystem& sys, PolicySpec spec, const CostSpec& cost, SimConfig sim,
                  SeedSpec seed, InitialStateSource initial, std::size_t rollouts);

  Eigen::MatrixXd evaluate(std::uint64_t iteration, const std::vector<ParamVector>& samples) override;

 private:
  const QndSystem& sys_;
  PolicySpec spec_;
  const CostSpec& cost_;
  SimConfig sim_;
  SeedSpec seed_;
  InitialStateSource initial_;
  std::size_t rollouts_;
};

struct OptimizeResult {
  SamplingDistribution distribution;
  std::vector<IterationStats> stats;
  /// First iteration index not yet run; resume from here.
  std::size_t next_iteration = 0;
};

using IterationCallback = std::function<void(const IterationStats&, const SamplingDistribution&)>;

/// Runs iterations [start, config.iterations): sample, evaluate, weight, step.
/// Randomness is indexed by iteration, so resuming from a checkpoint at
/// iteration k reproduces an uninterrupted run exactly.
OptimizeResult optimize(SamplingDistribution initial, const GassConfig& config,
                        BatchObjective& objective, std::size_t start_iteration = 0,
                        const IterationCallback& on_iteration = {});

/// Convenience overload: LeCun-initialized mean, constant sigma.
OptimizeResult optimize(const QndSystem& sys, const PolicySpec& spec, const CostSpec& cost,
                        const SimConfig& sim, const GassConfig& config,
                        const InitialStateSource& initial, double sigma,
                        const IterationCallback& on_iteration = {});

}  // namespace qfb
