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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qfb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Thrown on shape mismatches and invalid arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical result fails validation (non-finite entries,
/// collapsed trace, ...). Usually means the time step is too large.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tol {
inline constexpr double kHermitian = 1e-9;
inline constexpr double kTrace = 1e-9;
inline constexpr double kPsd = 1e-8;
inline constexpr double kDegenerate = 1e-9;
}  // namespace tol

enum class Axis { x, y, z };

Axis parse_axis(const std::string& name);

/// Conditioned density matrix. Construction through `from_matrix` validates
/// Hermiticity, unit trace and positivity at the library tolerances.
class DensityState {
 public:
  DensityState() = default;

  static DensityState from_matrix(ComplexMatrix m);
  /// No validation; for states produced by trusted kernels.
  static DensityState unchecked(ComplexMatrix m);
  static DensityState maximally_mixed(Eigen::Index dim);
  static DensityState pure(const ComplexVector& ket);
  /// Projector onto computational basis vector `index`.
  static DensityState basis_projector(Eigen::Index dim, Eigen::Index index);

  const ComplexMatrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double purity() const;

 private:
  explicit DensityState(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

ComplexMatrix identity(Eigen::Index dim);
ComplexMatrix pauli(Axis axis);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
/// Kronecker product of a list of factors, left factor most significant.
ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors);
/// `op` acting on qubit `target` (0-based, qubit 0 is the left factor).
ComplexMatrix embed_single(const ComplexMatrix& op, int target, int n_qubits);
/// Sum over qubits of the `axis` Pauli acting on that qubit.
ComplexMatrix collective_coupling(Axis axis, int n_qubits);
/// Truncated annihilation operator with super-diagonal sqrt(1..n_levels-1).
ComplexMatrix annihilation(Eigen::Index n_levels);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// D[A]rho = 1/2 [A, [A, rho]].
ComplexMatrix superop_D(const ComplexMatrix& a, const DensityState& rho);
/// H[A]rho = {A, rho} - 2 Tr(A rho) rho.
ComplexMatrix superop_H(const ComplexMatrix& a, const DensityState& rho);
/// Measurement back-action V rho + rho V^+ - Tr[(V + V^+) rho] rho. Agrees
/// with superop_H for Hermitian V and stays Hermitian otherwise.
ComplexMatrix backaction(const ComplexMatrix& v, const DensityState& rho);
/// Lindblad dissipator V rho V^+ - 1/2 {V^+ V, rho}; equals -D[V]rho for
/// Hermitian V.
ComplexMatrix lindblad_dissipator(const ComplexMatrix& v, const DensityState& rho);

/// Re Tr(A B) without forming the product.
double trace_product_real(const ComplexMatrix& a, const ComplexMatrix& b);

/// Re Tr(rho_a rho_b) clamped to [0, 1].
double fidelity_overlap(const DensityState& a, const DensityState& b);
double fidelity_overlap(const ComplexMatrix& a, const ComplexMatrix& b);

/// Haar-random pure state from a complex Gaussian ket.
DensityState random_pure_state(Eigen::Index dim, std::uint64_t seed);

bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::kHermitian);
double hermiticity_defect(const ComplexMatrix& m);
/// Sorted ascending eigenvalues of a Hermitian matrix.
RealVector hermitian_eigenvalues(const ComplexMatrix& m);

struct DegeneracyReport {
  std::vector<double> operator_eigenvalues;
  double diffusion_norm = 0.0;
  bool is_degenerate = false;
};

/// Eigenvalues of Hermitian `a` plus the Frobenius norm of H[a]rho.
DegeneracyReport degeneracy_report(const ComplexMatrix& a, const DensityState& rho);

/// Two-qubit symmetric Bell state (|01> + |10>)/sqrt(2).
DensityState bell_psi_plus();

}  // namespace qfb
