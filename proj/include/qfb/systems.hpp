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

#include <span>
#include <string>
#include <vector>

#include "qfb/qmath.hpp"

namespace qfb {

/// Drift / control / diffusion bundle of a QND-measured open system
///
///   d rho = F(rho) dt + G(rho, u) dt + B(rho) dW
///   F(rho) = -i[H0, rho] + c_diss * (V rho V^+ - 1/2 {V^+ V, rho})
///   G(rho, u) = -i sum_j u_j [H_j, rho]
///   B(rho) = c_diff * (V rho + rho V^+ - Tr[(V + V^+) rho] rho)
///
/// Immutable after construction; use the factory functions.
class QndSystem {
 public:
  static QndSystem make(std::string name, ComplexMatrix h0, std::vector<ComplexMatrix> control_hams,
                        ComplexMatrix v, double eta, double gamma, double dissipation_scale,
                        double diffusion_scale, int n_qubits);

  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return v_.rows(); }
  std::size_t control_dim() const { return control_hams_.size(); }
  const ComplexMatrix& h0() const { return h0_; }
  bool has_h0() const { return has_h0_; }
  const std::vector<ComplexMatrix>& control_hams() const { return control_hams_; }
  const ComplexMatrix& v() const { return v_; }
  const ComplexMatrix& v_adjoint() const { return v_adj_; }
  /// V^+ V, cached for the dissipator.
  const ComplexMatrix& v_dag_v() const { return vdv_; }
  double eta() const { return eta_; }
  double gamma() const { return gamma_; }
  double dissipation_scale() const { return dissipation_scale_; }
  double diffusion_scale() const { return diffusion_scale_; }
  /// Number of qubits when dim is 2^n and the system is a qubit register, else 0.
  int n_qubits() const { return n_qubits_; }

  QndSystem with_diffusion_scale(double scale) const;

 private:
  QndSystem() = default;

  std::string name_;
  ComplexMatrix h0_;
  bool has_h0_ = false;
  std::vector<ComplexMatrix> control_hams_;
  ComplexMatrix v_;
  ComplexMatrix v_adj_;
  ComplexMatrix vdv_;
  double eta_ = 1.0;
  double gamma_ = 0.0;
  double dissipation_scale_ = 0.0;
  double diffusion_scale_ = 0.0;
  int n_qubits_ = 0;
};

/// Two qubits under collective F_z measurement with sigma_y drives on each
/// qubit; H0 = 0, unit-strength dissipator scaled by gamma.
QndSystem two_qubit_system(double eta, double gamma = 1.0);

/// Truncated cavity under homodyne detection of the annihilation operator.
/// Dissipator prefactor sqrt(1 - eta) sqrt(gamma), diffusion sqrt(eta) sqrt(gamma).
QndSystem homodyne_system(Eigen::Index n_levels, double eta, double gamma, const ComplexMatrix& h0,
                          const std::vector<ComplexMatrix>& control_hams);

/// Oscillator Hamiltonian omega (a^+ a + 1/2) on n_levels.
ComplexMatrix oscillator_hamiltonian(Eigen::Index n_levels, double omega);

ComplexMatrix drift(const QndSystem& sys, const DensityState& rho);
ComplexMatrix controlled_drift(const QndSystem& sys, const DensityState& rho,
                               std::span<const double> u);
ComplexMatrix diffusion(const QndSystem& sys, const DensityState& rho);

}  // namespace qfb
