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

#include "qfb/gass.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace qfb {

void SamplingDistribution::validate() const {
  if (mu.size() != sigma.size()) throw DimensionError("SamplingDistribution: mu/sigma size mismatch");
  if (!mu.allFinite()) throw NumericalError("SamplingDistribution: non-finite mean");
  if (!(sigma.array() > 0.0).all()) throw DimensionError("SamplingDistribution: sigma must be > 0");
}

std::string to_string(SamplingScheme scheme) {
  return scheme == SamplingScheme::iid ? "iid" : "mirrored";
}

SamplingScheme parse_sampling_scheme(const std::string& name) {
  if (name == "iid") return SamplingScheme::iid;
  if (name == "mirrored") return SamplingScheme::mirrored;
  throw DimensionError("unknown sampling scheme '" + name + "'");
}

void GassConfig::validate() const {
  if (param_samples == 0) throw DimensionError("GassConfig: param_samples must be >= 1");
  if (rollouts == 0) throw DimensionError("GassConfig: rollouts must be >= 1");
  if (!(step_size > 0.0)) throw DimensionError("GassConfig: step_size must be positive");
  if (!(step_decay > 0.0)) throw DimensionError("GassConfig: step_decay must be positive");
  if (!(shape.kappa > 0.0)) throw DimensionError("GassConfig: kappa must be positive");
  if (!(sigma_decay > 0.0)) throw DimensionError("GassConfig: sigma_decay must be positive");
}

std::vector<ParamVector> sample_params(const SamplingDistribution& dist, std::size_t count,
                                       const SeedSpec& seed, std::uint64_t iteration,
                                       SamplingScheme scheme) {
  if (count == 0) throw DimensionError("sample_params: count must be >= 1");
  if (dist.mu.size() != dist.sigma.size()) throw DimensionError("sample_params: mu/sigma mismatch");
  const Eigen::Index n = dist.mu.size();
  std::vector<ParamVector> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    const bool mirror = scheme == SamplingScheme::mirrored && p % 2 == 1;
    const std::uint64_t stream_index = scheme == SamplingScheme::mirrored ? p / 2 : p;
    const CounterRng rng = seed.stream(StreamDomain::parameters, {iteration, stream_index, 0});
    ParamVector phi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = rng.normal(static_cast<std::uint64_t>(i));
      phi(i) = dist.mu(i) + dist.sigma(i) * (mirror ? -z : z);
    }
    out.push_back(std::move(phi));
  }
  return out;
}

RealVector shape_weights(const Eigen::MatrixXd& costs, const ShapeSpec& shape,
                         std::size_t* underflowed) {
  if (costs.rows() == 0 || costs.cols() == 0) throw DimensionError("shape_weights: empty cost matrix");
  if (!costs.allFinite()) throw NumericalError("shape_weights: non-finite costs");
  const double j_min = costs.minCoeff();
  const Eigen::Index n_params = costs.rows();
  const auto n_rollouts = static_cast<double>(costs.cols());
  RealVector s(n_params);
  std::size_t zeros = 0;
  for (Eigen::Index p = 0; p < n_params; ++p) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < costs.cols(); ++r) acc += std::exp(-shape.kappa * (costs(p, r) - j_min));
    s(p) = acc / n_rollouts;
    if (s(p) == 0.0) ++zeros;
  }
  if (underflowed != nullptr) *underflowed = zeros;
  const double total = s.sum();
  if (!(total > 0.0)) throw NumericalError("shape_weights: all weights underflowed");
  return s / total;
}

double effective_sample_size(const RealVector& weights) {
  return 1.0 / weights.squaredNorm();
}

SamplingDistribution mean_update(const SamplingDistribution& dist,
                                 const std::vector<ParamVector>& samples, const RealVector& weights,
                                 double step) {
  if (static_cast<Eigen::Index>(samples.size()) != weights.size()) {
    throw DimensionError("mean_update: one weight per sample required");
  }
  RealVector delta = RealVector::Zero(dist.mu.size());
  for (std::size_t p = 0; p < samples.size(); ++p) {
    if (samples[p].size() != dist.mu.size()) throw DimensionError("mean_update: sample size mismatch");
    delta += weights(static_cast<Eigen::Index>(p)) * (samples[p] - dist.mu);
  }
  SamplingDistribution out = dist;
  out.mu += step * delta;
  return out;
}

RealVector gradient_estimate(const Eigen::MatrixXd& costs, const std::vector<ParamVector>& samples,
                             const SamplingDistribution& dist, const ShapeSpec& shape) {
  if (costs.rows() != static_cast<Eigen::Index>(samples.size())) {
    throw DimensionError("gradient_estimate: one cost row per sample required");
  }
  const RealVector w = shape_weights(costs, shape);
  RealVector grad = RealVector::Zero(dist.mu.size());
  for (std::size_t p = 0; p < samples.size(); ++p) {
    grad += w(static_cast<Eigen::Index>(p)) * (samples[p] - dist.mu);
  }
  return grad.cwiseQuotient(dist.sigma.cwiseAbs2());
}

PolicyObjective::PolicyObjective(const QndSystem& sys, PolicySpec spec, const CostSpec& cost,
                                 SimConfig sim, SeedSpec seed, InitialStateSource initial,
                                 std::size_t rollouts)
    : sys_(sys),
      spec_(std::move(spec)),
      cost_(cost),
      sim_(sim),
      seed_(seed),
      initial_(std::move(initial)),
      rollouts_(rollouts) {
  spec_.validate();
  if (spec_.control_dim != sys_.control_dim()) {
    throw DimensionError("PolicyObjective: policy/system control dimension mismatch");
  }
  cost_.validate(sys_.control_dim());
  sim_.validate();
}

Eigen::MatrixXd PolicyObjective::evaluate(std::uint64_t iteration,
                                          const std::vector<ParamVector>& samples) {
  std::vector<Policy> policies;
  policies.reserve(samples.size());
  for (const auto& phi : samples) policies.emplace_back(spec_, phi);
  std::vector<const Controller*> controllers;
  for (const auto& p : policies) controllers.push_back(&p);
  BatchProblem problem;
  problem.system = &sys_;
  problem.cost = &cost_;
  problem.sim = sim_;
  problem.seed = seed_;
  problem.iteration = iteration;
  problem.initial = initial_;
  return batch_costs(problem, controllers, rollouts_);
}

OptimizeResult optimize(SamplingDistribution initial, const GassConfig& config,
                        BatchObjective& objective, std::size_t start_iteration,
                        const IterationCallback& on_iteration) {
  config.validate();
  initial.validate();
  OptimizeResult result;
  result.distribution = std::move(initial);
  result.next_iteration = start_iteration;
  SamplingDistribution& dist = result.distribution;
  for (std::size_t k = start_iteration; k < config.iterations; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    // Annealing is a pure function of k, so resuming needs only the mean.
    SamplingDistribution current = dist;
    if (config.sigma_decay != 1.0) {
      current.sigma *= std::pow(config.sigma_decay, static_cast<double>(k));
    }
    const std::vector<ParamVector> samples =
        sample_params(current, config.param_samples, config.seed, k, config.sampling);
    const Eigen::MatrixXd costs = objective.evaluate(k, samples);
    if (costs.rows() != static_cast<Eigen::Index>(samples.size())) {
      throw DimensionError("optimize: objective returned wrong number of rows");
    }
    IterationStats stats;
    stats.iteration = k;
    const RealVector w = shape_weights(costs, config.shape, &stats.underflowed);
    stats.step_size = config.step_size * std::pow(config.step_decay, static_cast<double>(k));
    const SamplingDistribution next = mean_update(current, samples, w, stats.step_size);
    stats.mean_cost = costs.mean();
    stats.best_cost = costs.rowwise().mean().minCoeff();
    stats.ess = effective_sample_size(w);
    stats.update_norm = (next.mu - dist.mu).norm();
    dist.mu = next.mu;
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.stats.push_back(stats);
    result.next_iteration = k + 1;
    if (on_iteration) on_iteration(stats, dist);
  }
  return result;
}

OptimizeResult optimize(const QndSystem& sys, const PolicySpec& spec, const CostSpec& cost,
                        const SimConfig& sim, const GassConfig& config,
                        const InitialStateSource& initial, double sigma,
                        const IterationCallback& on_iteration) {
  SamplingDistribution dist;
  dist.mu = init_params(spec, config.seed.stream(StreamDomain::policy_init, {}).key());
  dist.sigma = RealVector::Constant(dist.mu.size(), sigma);
  PolicyObjective objective(sys, spec, cost, sim, config.seed, initial, config.rollouts);
  return optimize(std::move(dist), config, objective, 0, on_iteration);
}

}  // namespace qfb
