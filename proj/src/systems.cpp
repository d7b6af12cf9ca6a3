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

#include "qfb/systems.hpp"

#include <cmath>

namespace qfb {

QndSystem QndSystem::make(std::string name, ComplexMatrix h0,
                          std::vector<ComplexMatrix> control_hams, ComplexMatrix v, double eta,
                          double gamma, double dissipation_scale, double diffusion_scale,
                          int n_qubits) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DimensionError("QndSystem: eta must lie in (0, 1]");
  if (!(gamma >= 0.0)) throw DimensionError("QndSystem: gamma must be nonnegative");
  if (v.rows() != v.cols() || v.rows() == 0) throw DimensionError("QndSystem: V must be square");
  const Eigen::Index dim = v.rows();
  if (h0.rows() != dim || h0.cols() != dim) throw DimensionError("QndSystem: H0 dimension mismatch");
  if (!is_hermitian(h0)) throw DimensionError("QndSystem: H0 is not Hermitian");
  for (const auto& h : control_hams) {
    if (h.rows() != dim || h.cols() != dim) {
      throw DimensionError("QndSystem: control Hamiltonian dimension mismatch");
    }
    if (!is_hermitian(h)) throw DimensionError("QndSystem: control Hamiltonian is not Hermitian");
  }
  QndSystem s;
  s.name_ = std::move(name);
  s.has_h0_ = h0.cwiseAbs().maxCoeff() > 0.0;
  s.h0_ = std::move(h0);
  s.control_hams_ = std::move(control_hams);
  s.v_adj_ = v.adjoint();
  s.vdv_ = s.v_adj_ * v;
  s.v_ = std::move(v);
  s.eta_ = eta;
  s.gamma_ = gamma;
  s.dissipation_scale_ = dissipation_scale;
  s.diffusion_scale_ = diffusion_scale;
  s.n_qubits_ = n_qubits;
  return s;
}

QndSystem QndSystem::with_diffusion_scale(double scale) const {
  QndSystem copy = *this;
  copy.diffusion_scale_ = scale;
  return copy;
}

QndSystem two_qubit_system(double eta, double gamma) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DimensionError("two_qubit_system: eta must lie in (0, 1]");
  if (!(gamma >= 0.0)) throw DimensionError("two_qubit_system: gamma must be nonnegative");
  const ComplexMatrix sy = pauli(Axis::y);
  std::vector<ComplexMatrix> controls{embed_single(sy, 0, 2), embed_single(sy, 1, 2)};
  return QndSystem::make("two_qubit", ComplexMatrix::Zero(4, 4), std::move(controls),
                         collective_coupling(Axis::z, 2), eta, gamma, gamma,
                         std::sqrt(eta * gamma), 2);
}

QndSystem homodyne_system(Eigen::Index n_levels, double eta, double gamma, const ComplexMatrix& h0,
                          const std::vector<ComplexMatrix>& control_hams) {
  if (n_levels < 2) throw DimensionError("homodyne_system: n_levels must be >= 2");
  if (!(eta > 0.0 && eta <= 1.0)) throw DimensionError("homodyne_system: eta must lie in (0, 1]");
  if (!(gamma >= 0.0)) throw DimensionError("homodyne_system: gamma must be nonnegative");
  const double sg = std::sqrt(gamma);
  return QndSystem::make("homodyne", h0, control_hams, annihilation(n_levels), eta, gamma,
                         std::sqrt(1.0 - eta) * sg, std::sqrt(eta) * sg, 0);
}

ComplexMatrix oscillator_hamiltonian(Eigen::Index n_levels, double omega) {
  ComplexMatrix h = ComplexMatrix::Zero(n_levels, n_levels);
  for (Eigen::Index n = 0; n < n_levels; ++n) h(n, n) = omega * (static_cast<double>(n) + 0.5);
  return h;
}

namespace {

void require_dim(const QndSystem& sys, const DensityState& rho, const char* what) {
  if (rho.dim() != sys.dim() || rho.matrix().cols() != sys.dim()) {
    throw DimensionError(std::string(what) + ": state dimension does not match system");
  }
}

}  // namespace

ComplexMatrix drift(const QndSystem& sys, const DensityState& rho) {
  require_dim(sys, rho, "drift");
  const Complex minus_i(0.0, -1.0);
  const ComplexMatrix& r = rho.matrix();
  ComplexMatrix out = sys.dissipation_scale() * lindblad_dissipator(sys.v(), rho);
  if (sys.has_h0()) out += minus_i * commutator(sys.h0(), r);
  return out;
}

ComplexMatrix controlled_drift(const QndSystem& sys, const DensityState& rho,
                               std::span<const double> u) {
  require_dim(sys, rho, "controlled_drift");
  if (u.size() != sys.control_dim()) {
    throw DimensionError("controlled_drift: control has " + std::to_string(u.size()) +
                         " entries, system expects " + std::to_string(sys.control_dim()));
  }
  ComplexMatrix h = ComplexMatrix::Zero(sys.dim(), sys.dim());
  for (std::size_t j = 0; j < u.size(); ++j) h += u[j] * sys.control_hams()[j];
  return Complex(0.0, -1.0) * commutator(h, rho.matrix());
}

ComplexMatrix diffusion(const QndSystem& sys, const DensityState& rho) {
  require_dim(sys, rho, "diffusion");
  return sys.diffusion_scale() * backaction(sys.v(), rho);
}

}  // namespace qfb
