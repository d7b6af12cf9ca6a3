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
#include <vector>

#include <gtest/gtest.h>

#include "qfb/systems.hpp"

namespace qfb {
namespace {

const Complex kI(0.0, 1.0);

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

DensityState random_mixed(Eigen::Index dim, std::uint64_t seed) {
  ComplexMatrix m = 0.7 * random_pure_state(dim, seed).matrix() +
                    0.3 * random_pure_state(dim, seed + 9999).matrix();
  return DensityState::from_matrix(m);
}

TEST(TwoQubitSystem, Structure) {
  const QndSystem sys = two_qubit_system(1.0);
  EXPECT_EQ(sys.dim(), 4);
  EXPECT_EQ(sys.control_dim(), 2u);
  EXPECT_EQ(sys.n_qubits(), 2);
  EXPECT_EQ(max_abs(sys.h0()), 0.0);
  EXPECT_FALSE(sys.has_h0());
  EXPECT_EQ(sys.control_hams()[0](0, 2), -kI);
  EXPECT_EQ(max_abs(sys.control_hams()[1] - kron(identity(2), pauli(Axis::y))), 0.0);
  const RealVector ev = hermitian_eigenvalues(sys.v());
  EXPECT_EQ(std::vector<double>(ev.data(), ev.data() + 4), (std::vector<double>{-2.0, 0.0, 0.0, 2.0}));
  EXPECT_DOUBLE_EQ(sys.diffusion_scale(), 1.0);
  EXPECT_DOUBLE_EQ(two_qubit_system(0.25).diffusion_scale(), 0.5);
}

TEST(TwoQubitSystem, RejectsBadEfficiency) {
  EXPECT_THROW(two_qubit_system(0.0), DimensionError);
  EXPECT_THROW(two_qubit_system(1.5), DimensionError);
}

TEST(TwoQubitSystem, FixedPointsOfTheUncontrolledFlow) {
  const QndSystem sys = two_qubit_system(1.0);
  for (const DensityState& rho : {DensityState::basis_projector(4, 0), bell_psi_plus()}) {
    EXPECT_EQ(max_abs(drift(sys, rho)), 0.0);
    EXPECT_EQ(max_abs(diffusion(sys, rho)), 0.0);
  }
}

// Hand-assembled two-qubit SME terms, written directly from the commutator form.
TEST(TwoQubitSystem, MatchesHandAssembledEquation) {
  const double eta = 0.6;
  const QndSystem sys = two_qubit_system(eta);
  const ComplexMatrix sy1 = kron(pauli(Axis::y), identity(2));
  const ComplexMatrix sy2 = kron(identity(2), pauli(Axis::y));
  ComplexMatrix fz = ComplexMatrix::Zero(4, 4);
  fz.diagonal() << 2.0, 0.0, 0.0, -2.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const DensityState state = random_mixed(4, s);
    const ComplexMatrix& r = state.matrix();
    const double u[2] = {std::sin(1.0 + s), std::cos(3.0 * s)};
    const ComplexMatrix control = -kI * u[0] * (sy1 * r - r * sy1) - kI * u[1] * (sy2 * r - r * sy2);
    const ComplexMatrix fzr = fz * r - r * fz;
    const ComplexMatrix dissip = -0.5 * (fz * fzr - fzr * fz);
    const ComplexMatrix noise = std::sqrt(eta) * (fz * r + r * fz - 2.0 * (fz * r).trace() * r);
    EXPECT_LT(max_abs(drift(sys, state) - dissip), 1e-12);
    EXPECT_LT(max_abs(controlled_drift(sys, state, u) - control), 1e-12);
    EXPECT_LT(max_abs(diffusion(sys, state) - noise), 1e-12);
  }
}

TEST(ControlledDrift, LinearAndZeroCases) {
  const QndSystem sys = two_qubit_system(1.0);
  const DensityState rho = random_mixed(4, 3);
  const double zero[2] = {0.0, 0.0};
  EXPECT_EQ(max_abs(controlled_drift(sys, rho, zero)), 0.0);
  const double u[2] = {0.3, -1.2};
  const double u2[2] = {0.6, -2.4};
  EXPECT_LT(max_abs(controlled_drift(sys, rho, u2) - 2.0 * controlled_drift(sys, rho, u)), 1e-14);
  const double e1[2] = {1.0, 0.0};
  EXPECT_EQ(max_abs(controlled_drift(sys, DensityState::maximally_mixed(4), e1)), 0.0);
  const double bad[3] = {1.0, 2.0, 3.0};
  EXPECT_THROW(controlled_drift(sys, rho, bad), DimensionError);
}

TEST(Systems, TermsAreTracelessAndHermitian) {
  const ComplexMatrix x = annihilation(5) + annihilation(5).adjoint();
  const QndSystem cavity = homodyne_system(5, 0.7, 2.0, oscillator_hamiltonian(5, 1.3), {x});
  const QndSystem qubits = two_qubit_system(0.8);
  for (const QndSystem* sys : {&qubits, &cavity}) {
    std::vector<double> u(sys->control_dim(), 0.7);
    for (std::uint64_t s = 0; s < 50; ++s) {
      const DensityState rho = random_mixed(sys->dim(), s + 17);
      for (const ComplexMatrix& term : {drift(*sys, rho), controlled_drift(*sys, rho, u), diffusion(*sys, rho)}) {
        EXPECT_LT(std::abs(term.trace()), 1e-12);
        EXPECT_LT(hermiticity_defect(term), 1e-12);
      }
    }
  }
}

TEST(HomodyneSystem, LadderAndScales) {
  const ComplexMatrix a3 = annihilation(3);
  ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
  expected(0, 1) = 1.0;
  expected(1, 2) = std::sqrt(2.0);
  EXPECT_EQ(max_abs(a3 - expected), 0.0);

  const QndSystem sys = homodyne_system(3, 0.5, 4.0, ComplexMatrix::Zero(3, 3), {});
  EXPECT_EQ(max_abs(sys.v() - expected), 0.0);
  EXPECT_DOUBLE_EQ(sys.dissipation_scale(), std::sqrt(0.5) * 2.0);
  EXPECT_DOUBLE_EQ(sys.diffusion_scale(), std::sqrt(0.5) * 2.0);
  EXPECT_EQ(sys.n_qubits(), 0);

  const ComplexMatrix c = a3 * a3.adjoint() - a3.adjoint() * a3;
  EXPECT_LT(max_abs(c.topLeftCorner(2, 2) - identity(2)), 1e-14);
}

TEST(HomodyneSystem, ZeroRateIsHamiltonian) {
  const ComplexMatrix h0 = oscillator_hamiltonian(4, 2.0);
  const QndSystem sys = homodyne_system(4, 0.3, 0.0, h0, {});
  EXPECT_EQ(sys.diffusion_scale(), 0.0);
  const DensityState rho = random_mixed(4, 1);
  EXPECT_LT(max_abs(drift(sys, rho) + kI * commutator(h0, rho.matrix())), 1e-14);
  EXPECT_EQ(max_abs(diffusion(sys, rho)), 0.0);
}

TEST(HomodyneSystem, UnitEfficiencyHasNoDissipator) {
  const QndSystem sys = homodyne_system(4, 1.0, 1.0, ComplexMatrix::Zero(4, 4), {});
  EXPECT_EQ(sys.dissipation_scale(), 0.0);
  EXPECT_EQ(max_abs(drift(sys, random_mixed(4, 2))), 0.0);
}

TEST(HomodyneSystem, Validation) {
  EXPECT_THROW(homodyne_system(1, 0.5, 1.0, ComplexMatrix::Zero(1, 1), {}), DimensionError);
  EXPECT_THROW(homodyne_system(3, 0.5, -1.0, ComplexMatrix::Zero(3, 3), {}), DimensionError);
  EXPECT_THROW(homodyne_system(3, 0.5, 1.0, ComplexMatrix::Zero(4, 4), {}), DimensionError);
  EXPECT_THROW(homodyne_system(3, 0.5, 1.0, ComplexMatrix::Zero(3, 3), {annihilation(3)}), DimensionError);
}

TEST(Systems, DimensionMismatchIsRejected) {
  const QndSystem sys = two_qubit_system(1.0);
  EXPECT_THROW(drift(sys, DensityState::maximally_mixed(2)), DimensionError);
  EXPECT_THROW(diffusion(sys, DensityState::maximally_mixed(3)), DimensionError);
}

}  // namespace
}  // namespace qfb
