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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "qfb/gass.hpp"
#include "quadratic_objective.hpp"

namespace qfb {
namespace {

SamplingDistribution make_dist(RealVector mu, double sigma) {
  SamplingDistribution d;
  d.sigma = RealVector::Constant(mu.size(), sigma);
  d.mu = std::move(mu);
  return d;
}

Eigen::MatrixXd column(std::initializer_list<double> values) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

TEST(ShapeWeights, DirectEvaluation) {
  const RealVector w = shape_weights(column({0.0, std::log(2.0), std::log(4.0)}), ShapeSpec{1.0});
  EXPECT_NEAR(w(0), 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(w(1), 2.0 / 7.0, 1e-15);
  EXPECT_NEAR(w(2), 1.0 / 7.0, 1e-15);
}

TEST(ShapeWeights, EqualCostsGiveUniformWeights) {
  const RealVector w = shape_weights(Eigen::MatrixXd::Constant(5, 3, 2.7), ShapeSpec{1.3});
  for (Eigen::Index p = 0; p < 5; ++p) EXPECT_DOUBLE_EQ(w(p), 0.2);
}

TEST(ShapeWeights, HugeCostsConcentrateOnTheCheapest) {
  std::size_t underflowed = 0;
  const RealVector w = shape_weights(column({1e6, 0.0, 1e7}), ShapeSpec{1.0}, &underflowed);
  EXPECT_EQ(w(1), 1.0);
  EXPECT_EQ(w(0), 0.0);
  EXPECT_EQ(underflowed, 2u);
}

TEST(ShapeWeights, AveragesShapeOverRolloutsBeforeNormalizing) {
  Eigen::MatrixXd j(2, 2);
  j << 0.0, std::log(3.0), std::log(2.0), std::log(2.0);
  const RealVector w = shape_weights(j, ShapeSpec{1.0});
  // S_0 = (1 + 1/3) / 2 = 2/3 and S_1 = 1/2.
  EXPECT_NEAR(w(0), (2.0 / 3.0) / (2.0 / 3.0 + 0.5), 1e-15);
}

TEST(ShapeWeights, InvariantUnderCostShift) {
  Eigen::MatrixXd j(4, 3);
  j << 0.3, 0.9, 1.1, 2.0, 0.1, 0.4, 0.7, 0.7, 0.2, 1.5, 0.05, 0.6;
  const RealVector w = shape_weights(j, ShapeSpec{2.0});
  for (double c : {-5.0, 1.0, 800.0}) {
    const RealVector shifted = shape_weights((j.array() + c).matrix(), ShapeSpec{2.0});
    EXPECT_LT((shifted - w).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(ShapeWeights, RejectsNonFiniteCosts) {
  EXPECT_THROW(shape_weights(column({0.0, NAN}), ShapeSpec{}), NumericalError);
  EXPECT_THROW(shape_weights(column({0.0, INFINITY}), ShapeSpec{}), NumericalError);
}

TEST(EffectiveSampleSize, Bounds) {
  EXPECT_DOUBLE_EQ(effective_sample_size(RealVector::Constant(8, 0.125)), 8.0);
  RealVector one_hot = RealVector::Zero(8);
  one_hot(3) = 1.0;
  EXPECT_DOUBLE_EQ(effective_sample_size(one_hot), 1.0);
}

TEST(SampleParams, ZeroWidthGivesTheMean) {
  SamplingDistribution d = make_dist(RealVector::LinSpaced(6, -1.0, 1.0), 1.0);
  d.sigma.setConstant(1e-300);
  for (const auto& phi : sample_params(d, 10, SeedSpec(3), 0)) {
    EXPECT_LT((phi - d.mu).cwiseAbs().maxCoeff(), 1e-290);
  }
}

TEST(SampleParams, DeterministicPerSeedAndIteration) {
  const SamplingDistribution d = make_dist(RealVector::Zero(4), 0.5);
  const auto a = sample_params(d, 5, SeedSpec(1), 7);
  const auto b = sample_params(d, 5, SeedSpec(1), 7);
  const auto c = sample_params(d, 5, SeedSpec(1), 8);
  for (std::size_t p = 0; p < 5; ++p) {
    EXPECT_EQ(a[p], b[p]);
    EXPECT_NE(a[p], c[p]);
  }
}

TEST(SampleParams, PerCoordinateVarianceMatchesSigma) {
  RealVector sigma(3);
  sigma << 0.1, 1.0, 2.5;
  SamplingDistribution d;
  d.mu = RealVector::Constant(3, 4.0);
  d.sigma = sigma;
  const std::size_t n = 100000;
  const auto samples = sample_params(d, n, SeedSpec(17), 0);
  for (Eigen::Index i = 0; i < 3; ++i) {
    double sum = 0.0, sq = 0.0;
    for (const auto& phi : samples) {
      sum += phi(i);
      sq += phi(i) * phi(i);
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(var / (sigma(i) * sigma(i)), 1.0, 0.03);
  }
}

TEST(SampleParams, MirroredPairsAreSymmetric) {
  const SamplingDistribution d = make_dist(RealVector::Constant(5, 1.5), 0.4);
  const auto s = sample_params(d, 7, SeedSpec(2), 3, SamplingScheme::mirrored);
  for (std::size_t p = 0; p + 1 < 7; p += 2) {
    EXPECT_LT((s[p] + s[p + 1] - 2.0 * d.mu).cwiseAbs().maxCoeff(), 1e-15);
  }
  EXPECT_GT((s[6] - d.mu).norm(), 0.0);
  EXPECT_GT((s[0] - s[2]).norm(), 0.0);
}

TEST(MeanUpdate, SingleSampleMovesTowardIt) {
  const SamplingDistribution d = make_dist(RealVector::Zero(3), 0.2);
  const ParamVector phi = RealVector::Constant(3, 2.0);
  const SamplingDistribution next = mean_update(d, {phi}, RealVector::Ones(1), 0.25);
  EXPECT_LT((next.mu - RealVector::Constant(3, 0.5)).norm(), 1e-15);
  EXPECT_EQ(next.sigma, d.sigma);
}

TEST(MeanUpdate, SymmetricUniformSamplesLeaveMeanFixed) {
  RealVector mu(2);
  mu << 0.5, -0.25;
  const SamplingDistribution d = make_dist(mu, 1.0);
  RealVector off(2);
  off << 0.3, 0.7;
  const SamplingDistribution next = mean_update(d, {mu + off, mu - off}, RealVector::Constant(2, 0.5), 1.0);
  EXPECT_LT((next.mu - mu).norm(), 1e-15);
}

TEST(MeanUpdate, FullWeightOnOneSampleJumpsThere) {
  const SamplingDistribution d = make_dist(RealVector::Zero(2), 1.0);
  const ParamVector a = RealVector::Constant(2, 3.0), b = RealVector::Constant(2, -1.0);
  RealVector w(2);
  w << 0.0, 1.0;
  EXPECT_EQ(mean_update(d, {a, b}, w, 1.0).mu, b);
}

TEST(MeanUpdate, StaysInConvexHull) {
  const SamplingDistribution d = make_dist(RealVector::Zero(1), 1.0);
  const auto samples = sample_params(d, 20, SeedSpec(5), 0);
  double lo = 0.0, hi = 0.0;
  for (const auto& s : samples) {
    lo = std::min(lo, s(0));
    hi = std::max(hi, s(0));
  }
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd j(20, 1);
    for (Eigen::Index p = 0; p < 20; ++p) j(p, 0) = 3.0 * CounterRng(trial).uniform(static_cast<std::uint64_t>(p));
    const RealVector w = shape_weights(j, ShapeSpec{1.0});
    for (double step : {0.3, 1.0}) {
      const double mu = mean_update(d, samples, w, step).mu(0);
      EXPECT_GE(mu, step * lo - 1e-15);
      EXPECT_LE(mu, step * hi + 1e-15);
    }
  }
}

TEST(GradientEstimate, ConsistentWithMeanUpdate) {
  RealVector mu(3);
  mu << 0.1, -0.2, 0.3;
  SamplingDistribution d;
  d.mu = mu;
  d.sigma = RealVector(3);
  d.sigma << 0.5, 1.0, 2.0;
  const auto samples = sample_params(d, 12, SeedSpec(6), 0);
  Eigen::MatrixXd j(12, 2);
  for (Eigen::Index p = 0; p < 12; ++p) j.row(p) << samples[p].squaredNorm(), samples[p].sum();
  const ShapeSpec shape{0.7};
  const RealVector g = gradient_estimate(j, samples, d, shape);
  const RealVector direct = mean_update(d, samples, shape_weights(j, shape), 1.0).mu - mu;
  EXPECT_LT((d.sigma.cwiseAbs2().cwiseProduct(g) - direct).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GradientEstimate, ZeroForUniformSymmetricSamples) {
  const SamplingDistribution d = make_dist(RealVector::Zero(2), 0.5);
  const auto samples = sample_params(d, 10, SeedSpec(1), 0, SamplingScheme::mirrored);
  EXPECT_LT(gradient_estimate(Eigen::MatrixXd::Ones(10, 1), samples, d, ShapeSpec{}).norm(), 1e-15);
}

// <exp(-(phi - a)^2)> under N(mu, s^2) is exp(-(mu - a)^2 / (1 + 2 s^2)) / sqrt(1 + 2 s^2).
TEST(GradientEstimate, MatchesFiniteDifferenceOfLogSmoothedObjective) {
  const double a = 0.8, mu = 0.1, s = 0.6, h = 1e-4;
  auto log_s = [&](double m) { return -(m - a) * (m - a) / (1.0 + 2.0 * s * s) - 0.5 * std::log(1.0 + 2.0 * s * s); };
  const double fd = (log_s(mu + h) - log_s(mu - h)) / (2.0 * h);
  const SamplingDistribution d = make_dist(RealVector::Constant(1, mu), s);
  const std::size_t n = 100000;
  const auto samples = sample_params(d, n, SeedSpec(41), 0);
  Eigen::MatrixXd j(n, 1);
  for (std::size_t p = 0; p < n; ++p) j(p, 0) = std::pow(samples[p](0) - a, 2);
  const double g = gradient_estimate(j, samples, d, ShapeSpec{1.0})(0);
  // Delta-method standard error of the self-normalized ratio estimator.
  double mean_s = 0.0;
  for (std::size_t p = 0; p < n; ++p) mean_s += std::exp(-j(p, 0));
  mean_s /= n;
  double var = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double sp = std::exp(-j(p, 0));
    const double psi = (sp * (samples[p](0) - mu) / (s * s) - g * sp) / mean_s;
    var += psi * psi;
  }
  const double se = std::sqrt(var / (n - 1) / n);
  EXPECT_LE(std::abs(g - fd), 3.0 * se) << "g=" << g << " fd=" << fd << " se=" << se;
}

TEST(Optimize, ZeroIterationsReturnsTheInitialDistribution) {
  const SamplingDistribution d = make_dist(RealVector::LinSpaced(4, 0.0, 1.0), 0.3);
  GassConfig cfg;
  cfg.iterations = 0;
  testing::QuadraticObjective obj(RealVector::Zero(4), 1);
  const OptimizeResult r = optimize(d, cfg, obj);
  EXPECT_EQ(r.distribution.mu, d.mu);
  EXPECT_EQ(r.distribution.sigma, d.sigma);
  EXPECT_TRUE(r.stats.empty());
  EXPECT_EQ(r.next_iteration, 0u);
}

GassConfig quadratic_config(std::uint64_t seed) {
  GassConfig cfg;
  cfg.iterations = 200;
  cfg.param_samples = 64;
  cfg.rollouts = 1;
  cfg.step_size = 0.8;
  cfg.shape.kappa = 1.0;
  cfg.seed = SeedSpec(seed);
  return cfg;
}

TEST(Optimize, ConvergesOnQuadratic) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const RealVector target = RealVector::LinSpaced(10, -1.0, 2.0);
    testing::QuadraticObjective obj(target, 1);
    const OptimizeResult r = optimize(make_dist(RealVector::Zero(10), 0.3), quadratic_config(seed), obj);
    EXPECT_LT((r.distribution.mu - target).norm(), 1e-2) << "seed " << seed;
    ASSERT_EQ(r.stats.size(), 200u);
    for (const auto& s : r.stats) {
      EXPECT_GE(s.ess, 1.0 - 1e-12);
      EXPECT_LE(s.ess, 64.0 + 1e-9);
    }
  }
}

TEST(Optimize, ResumeMatchesUninterruptedRun) {
  const RealVector target = RealVector::Constant(5, 0.5);
  GassConfig cfg = quadratic_config(9);
  cfg.iterations = 30;
  cfg.sigma_decay = 0.97;
  cfg.step_decay = 0.99;
  testing::QuadraticObjective obj(target, 2);
  const SamplingDistribution d0 = make_dist(RealVector::Zero(5), 0.3);
  const OptimizeResult full = optimize(d0, cfg, obj);
  GassConfig first = cfg;
  first.iterations = 12;
  const OptimizeResult head = optimize(d0, first, obj);
  EXPECT_EQ(head.next_iteration, 12u);
  const OptimizeResult tail = optimize(head.distribution, cfg, obj, head.next_iteration);
  EXPECT_EQ(tail.distribution.mu, full.distribution.mu);
  EXPECT_EQ(tail.stats.back().mean_cost, full.stats.back().mean_cost);
}

TEST(Optimize, IdenticalSeedsGiveIdenticalMeans) {
  const QndSystem sys = two_qubit_system(1.0);
  const PolicySpec spec = linear_policy_spec(FeatureMap::pauli, 4, 2);
  const CostSpec cost = default_cost_spec(bell_psi_plus(), 2);
  SimConfig sim;
  sim.n_steps = 20;
  GassConfig cfg;
  cfg.iterations = 3;
  cfg.param_samples = 4;
  cfg.rollouts = 2;
  cfg.seed = SeedSpec(5);
  std::vector<RealVector> path_a, path_b;
  optimize(sys, spec, cost, sim, cfg, InitialStateSource::random_pure(4), 0.1,
           [&](const IterationStats&, const SamplingDistribution& d) { path_a.push_back(d.mu); });
  optimize(sys, spec, cost, sim, cfg, InitialStateSource::random_pure(4), 0.1,
           [&](const IterationStats&, const SamplingDistribution& d) { path_b.push_back(d.mu); });
  ASSERT_EQ(path_a.size(), 3u);
  EXPECT_EQ(path_a, path_b);
}

TEST(Optimize, RejectsBadConfig) {
  GassConfig cfg;
  cfg.param_samples = 0;
  testing::QuadraticObjective obj(RealVector::Zero(1), 1);
  EXPECT_THROW(optimize(make_dist(RealVector::Zero(1), 1.0), cfg, obj), DimensionError);
  cfg = GassConfig{};
  EXPECT_THROW(optimize(make_dist(RealVector::Zero(1), -1.0), cfg, obj), DimensionError);
}

}  // namespace
}  // namespace qfb
