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
#include <limits>

#include <gtest/gtest.h>

#include "qfb/cost.hpp"
#include "qfb/simulator.hpp"

namespace qfb {
namespace {

const Complex kI(0.0, 1.0);

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

CostSpec zero_cost(const DensityState& target, std::size_t m) {
  CostSpec c = default_cost_spec(target, m);
  return c;
}

// exp(-i theta sigma_z) for a single qubit, written out in closed form.
ComplexMatrix expm_sigma_z(double theta) {
  ComplexMatrix u = ComplexMatrix::Zero(2, 2);
  u(0, 0) = std::exp(-kI * theta);
  u(1, 1) = std::exp(kI * theta);
  return u;
}

TEST(EmStep, BellStateIsFixedForAnyNoise) {
  const QndSystem sys = two_qubit_system(1.0);
  const double u[2] = {0.0, 0.0};
  SimConfig cfg;
  for (double dw : {-3.0, -0.1, 0.0, 0.05, 2.5}) {
    const DensityState next = em_step(sys, bell_psi_plus(), u, dw, cfg);
    EXPECT_EQ(max_abs(next.matrix() - bell_psi_plus().matrix()), 0.0);
  }
}

TEST(EmStep, EigenprojectorsAreFixedForAnyNoise) {
  const QndSystem sys = two_qubit_system(0.7);
  const double u[2] = {0.0, 0.0};
  SimConfig cfg;
  const SeedSpec seed(8);
  for (Eigen::Index k = 0; k < 4; ++k) {
    const DensityState p = DensityState::basis_projector(4, k);
    DensityState rho = p;
    for (std::uint64_t t = 0; t < 200; ++t) {
      rho = em_step(sys, rho, u, sample_wiener(seed, {0, 0, static_cast<std::uint64_t>(k)}, t, 1e-2), cfg);
    }
    EXPECT_EQ(max_abs(rho.matrix() - p.matrix()), 0.0);
  }
}

TEST(EmIncrement, TracelessAndHermitianBeforeProjection) {
  const QndSystem qubits = two_qubit_system(0.9);
  const ComplexMatrix x = annihilation(6) + annihilation(6).adjoint();
  const QndSystem cavity = homodyne_system(6, 0.6, 1.5, oscillator_hamiltonian(6, 1.0), {x});
  const SeedSpec seed(99);
  for (const QndSystem* sys : {&qubits, &cavity}) {
    StepWorkspace ws(sys->dim());
    std::vector<double> u(sys->control_dim());
    for (std::uint64_t s = 0; s < 200; ++s) {
      const DensityState rho = random_pure_state(sys->dim(), s);
      for (double& v : u) v = std::sin(static_cast<double>(s) * 1.7);
      em_increment(*sys, rho.matrix(), u, sample_wiener(seed, {0, 0, 0}, s, 1e-3), 1e-3, ws);
      EXPECT_LT(std::abs(ws.incr.trace()), 1e-12);
      EXPECT_LT(hermiticity_defect(ws.incr), 1e-12);
    }
  }
}

TEST(EmStep, HamiltonianStepMatchesMatrixExponential) {
  const QndSystem sys = QndSystem::make("sz", pauli(Axis::z), {}, ComplexMatrix::Zero(2, 2), 1.0, 0.0, 0.0, 0.0, 1);
  const DensityState rho0 = random_pure_state(2, 4);
  SimConfig cfg;
  cfg.renormalize = false;
  cfg.psd_projection = false;
  std::vector<double> errors;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    cfg.dt = dt;
    const DensityState next = em_step(sys, rho0, {}, 0.0, cfg);
    const ComplexMatrix u = expm_sigma_z(dt);
    const ComplexMatrix exact = u * rho0.matrix() * u.adjoint();
    errors.push_back(max_abs(next.matrix() - exact));
    EXPECT_LT(errors.back(), 2.0 * dt * dt);
  }
  // Local error is second order: halving dt quarters it.
  EXPECT_NEAR(errors[0] / errors[1], 4.0, 0.2);
  EXPECT_NEAR(errors[1] / errors[2], 4.0, 0.2);
}

TEST(EmStep, Validation) {
  const QndSystem sys = two_qubit_system(1.0);
  const double u[2] = {0.0, 0.0};
  const double bad_u[1] = {0.0};
  SimConfig cfg;
  EXPECT_THROW(em_step(sys, bell_psi_plus(), bad_u, 0.0, cfg), DimensionError);
  EXPECT_THROW(em_step(sys, DensityState::maximally_mixed(2), u, 0.0, cfg), DimensionError);
  EXPECT_THROW(em_step(sys, bell_psi_plus(), u, NAN, cfg), NumericalError);
  cfg.dt = 0.0;
  EXPECT_THROW(em_step(sys, bell_psi_plus(), u, 0.0, cfg), DimensionError);
}

TEST(EmStep, HugeStepsFailLoudly) {
  const QndSystem sys = two_qubit_system(1.0);
  const double big = std::numeric_limits<double>::max();
  const double u[2] = {big, big};
  SimConfig cfg;
  cfg.dt = 1.0;
  EXPECT_THROW(em_step(sys, random_pure_state(4, 1), u, 0.0, cfg), NumericalError);
  const double inf_u[2] = {INFINITY, 0.0};
  EXPECT_THROW(em_step(sys, bell_psi_plus(), inf_u, 0.0, SimConfig{}), NumericalError);
}

TEST(ProjectState, ClipsNegativeEigenvalues) {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = 1.1;
  rho(1, 1) = -0.1;
  SimConfig cfg;
  StepWorkspace ws(2);
  project_state(rho, cfg, ws);
  EXPECT_NEAR(rho(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(rho(1, 1)), 0.0, 1e-15);
  EXPECT_NO_THROW(DensityState::from_matrix(rho));
}

TEST(ProjectState, LeavesValidStatesAlone) {
  const DensityState rho = random_pure_state(4, 12);
  ComplexMatrix m = rho.matrix();
  SimConfig cfg;
  StepWorkspace ws(4);
  project_state(m, cfg, ws);
  EXPECT_LT(max_abs(m - rho.matrix()), 1e-15);
}

TEST(Rollout, ZeroPolicyAtTargetStaysPut) {
  const QndSystem sys = two_qubit_system(1.0);
  const CostSpec cost = zero_cost(bell_psi_plus(), 2);
  SimConfig cfg;
  cfg.n_steps = 300;
  const ZeroController zero(2);
  const Trajectory traj = rollout(sys, zero, bell_psi_plus(), cost, cfg,
                                  NoiseStream(SeedSpec(1).stream(StreamDomain::wiener, {}), cfg.dt));
  ASSERT_EQ(traj.states.size(), 301u);
  ASSERT_EQ(traj.controls.size(), 300u);
  for (const auto& s : traj.states) EXPECT_EQ(max_abs(s.matrix() - bell_psi_plus().matrix()), 0.0);
  for (const auto& u : traj.controls) EXPECT_EQ(u.cwiseAbs().maxCoeff(), 0.0);
  for (double c : traj.running_cost) EXPECT_EQ(c, 0.0);
}

TEST(Rollout, RecordIsInnovationPlusMeanSignal) {
  const QndSystem sys = two_qubit_system(0.8);
  const CostSpec cost = zero_cost(bell_psi_plus(), 2);
  SimConfig cfg;
  cfg.n_steps = 200;
  std::vector<RealVector> schedule(200, RealVector::Constant(2, 0.4));
  const ScheduleController ctrl(schedule);
  const Trajectory traj = rollout(sys, ctrl, random_pure_state(4, 2), cost, cfg,
                                  NoiseStream(SeedSpec(3).stream(StreamDomain::wiener, {}), cfg.dt));
  for (std::size_t t = 0; t < traj.n_steps(); ++t) {
    const double mean_signal = (sys.v() + sys.v_adjoint()).cwiseProduct(traj.states[t].matrix().transpose()).sum().real();
    EXPECT_NEAR(traj.record[t], traj.noise[t] + mean_signal * cfg.dt, 1e-15);
    EXPECT_EQ(traj.controls[t](0), 0.4);
  }
}

TEST(Rollout, DeterministicPerSeed) {
  const QndSystem sys = two_qubit_system(1.0);
  const CostSpec cost = zero_cost(bell_psi_plus(), 2);
  SimConfig cfg;
  cfg.n_steps = 250;
  const ZeroController zero(2);
  auto run = [&](std::uint64_t s) {
    return rollout(sys, zero, random_pure_state(4, 5), cost, cfg,
                   NoiseStream(SeedSpec(s).stream(StreamDomain::wiener, {1, 0, 2}), cfg.dt));
  };
  const Trajectory a = run(10), b = run(10), c = run(11);
  for (std::size_t t = 0; t <= cfg.n_steps; ++t) {
    EXPECT_EQ(max_abs(a.states[t].matrix() - b.states[t].matrix()), 0.0);
  }
  EXPECT_GT(max_abs(a.states.back().matrix() - c.states.back().matrix()), 1e-6);
}

TEST(Rollout, StatesRemainValid) {
  const QndSystem sys = two_qubit_system(1.0);
  const CostSpec cost = zero_cost(bell_psi_plus(), 2);
  SimConfig cfg;
  std::vector<RealVector> schedule(cfg.n_steps, RealVector::Constant(2, 3.0));
  const ScheduleController ctrl(schedule);
  for (std::uint64_t r = 0; r < 5; ++r) {
    const Trajectory traj = rollout(sys, ctrl, random_pure_state(4, r), cost, cfg,
                                    NoiseStream(SeedSpec(7).stream(StreamDomain::wiener, {0, 0, r}), cfg.dt));
    for (const auto& s : traj.states) EXPECT_NO_THROW(DensityState::from_matrix(s.matrix()));
  }
}

TEST(LindbladPropagate, EigenstateIsConstant) {
  const QndSystem sys = two_qubit_system(1.0);
  SimConfig cfg;
  cfg.n_steps = 100;
  const auto states = lindblad_propagate(sys, DensityState::basis_projector(4, 0),
                                         std::vector<RealVector>(100, RealVector::Zero(2)), cfg);
  ASSERT_EQ(states.size(), 101u);
  for (const auto& s : states) EXPECT_EQ(max_abs(s.matrix() - DensityState::basis_projector(4, 0).matrix()), 0.0);
}

TEST(LindbladPropagate, PurityNonIncreasing) {
  const QndSystem sys = two_qubit_system(1.0);
  SimConfig cfg;
  const auto states = lindblad_propagate(sys, random_pure_state(4, 21),
                                         std::vector<RealVector>(cfg.n_steps, RealVector::Zero(2)), cfg);
  for (std::size_t t = 1; t < states.size(); ++t) {
    EXPECT_LE(states[t].purity(), states[t - 1].purity() + 1e-14);
  }
  EXPECT_LT(states.back().purity(), 0.99);
}

TEST(LindbladPropagate, EqualsRolloutWithoutDiffusion) {
  const QndSystem sys = two_qubit_system(1.0).with_diffusion_scale(0.0);
  const CostSpec cost = zero_cost(bell_psi_plus(), 2);
  SimConfig cfg;
  cfg.n_steps = 400;
  std::vector<RealVector> schedule;
  for (std::size_t t = 0; t < cfg.n_steps; ++t) {
    RealVector u(2);
    u << std::sin(0.01 * t), 0.5;
    schedule.push_back(u);
  }
  const DensityState rho0 = random_pure_state(4, 33);
  const auto prop = lindblad_propagate(sys, rho0, schedule, cfg);
  const Trajectory traj = rollout(sys, ScheduleController(schedule), rho0, cost, cfg,
                                  NoiseStream(SeedSpec(4).stream(StreamDomain::wiener, {}), cfg.dt));
  for (std::size_t t = 0; t <= cfg.n_steps; ++t) {
    EXPECT_EQ(max_abs(prop[t].matrix() - traj.states[t].matrix()), 0.0);
  }
}

// Averages of uncontrolled trajectories converge to the noise-free Euler
// flow. Positivity clipping is disabled so that the Euler mean is exactly the
// Euler Lindblad step.
void check_lindblad_oracle(std::size_t m, std::uint64_t seed) {
  const QndSystem sys = two_qubit_system(1.0);
  const CostSpec cost = zero_cost(bell_psi_plus(), 2);
  SimConfig cfg;
  cfg.n_steps = 1000;
  cfg.psd_projection = false;
  const DensityState rho0 = random_pure_state(4, 123);
  const auto oracle = lindblad_propagate(sys, rho0, std::vector<RealVector>(cfg.n_steps, RealVector::Zero(2)), cfg);
  const ZeroController zero(2);
  std::vector<ComplexMatrix> sum(11, ComplexMatrix::Zero(4, 4));
  std::vector<Eigen::MatrixXd> sq(11, Eigen::MatrixXd::Zero(8, 4));
  for (std::size_t r = 0; r < m; ++r) {
    const Trajectory traj = rollout(sys, zero, rho0, cost, cfg,
                                    NoiseStream(SeedSpec(seed).stream(StreamDomain::wiener, {0, 0, r}), cfg.dt));
    for (std::size_t k = 0; k <= 10; ++k) {
      const ComplexMatrix& s = traj.states[100 * k].matrix();
      sum[k] += s;
      sq[k].topRows(4) += s.real().cwiseAbs2();
      sq[k].bottomRows(4) += s.imag().cwiseAbs2();
    }
  }
  const auto n = static_cast<double>(m);
  for (std::size_t k = 1; k <= 10; ++k) {
    const ComplexMatrix mean = sum[k] / n;
    const ComplexMatrix& want = oracle[100 * k].matrix();
    for (Eigen::Index i = 0; i < 4; ++i) {
      for (Eigen::Index j = 0; j < 4; ++j) {
        const double se_re = std::sqrt(std::max(sq[k](i, j) / n - std::pow(mean(i, j).real(), 2), 0.0) / n);
        const double se_im = std::sqrt(std::max(sq[k](i + 4, j) / n - std::pow(mean(i, j).imag(), 2), 0.0) / n);
        EXPECT_LE(std::abs(mean(i, j).real() - want(i, j).real()), 5.0 * se_re + 1e-12)
            << "step " << 100 * k << " entry " << i << "," << j;
        EXPECT_LE(std::abs(mean(i, j).imag() - want(i, j).imag()), 5.0 * se_im + 1e-12);
      }
    }
  }
}

TEST(LindbladOracle, ThousandTrajectories) { check_lindblad_oracle(1000, 1); }

TEST(LindbladOracle, FourThousandTrajectories) { check_lindblad_oracle(4000, 2); }

}  // namespace
}  // namespace qfb
