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

#include "qfb/qmath.hpp"

#include <algorithm>
#include <cmath>

#include "qfb/rng.hpp"

namespace qfb {

namespace {

void require_same_dims(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
  }
}

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
  }
}

}  // namespace

Axis parse_axis(const std::string& name) {
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  if (name == "z") return Axis::z;
  throw DimensionError("unknown axis '" + name + "'");
}

DensityState DensityState::from_matrix(ComplexMatrix m) {
  require_square(m, "DensityState");
  if (!m.allFinite()) throw NumericalError("DensityState: non-finite entries");
  if (!is_hermitian(m, tol::kHermitian)) {
    throw NumericalError("DensityState: matrix is not Hermitian");
  }
  const Complex tr = m.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > tol::kTrace) {
    throw NumericalError("DensityState: trace " + std::to_string(tr.real()) + " != 1");
  }
  const RealVector ev = hermitian_eigenvalues(m);
  if (ev.minCoeff() < -tol::kPsd) {
    throw NumericalError("DensityState: negative eigenvalue " + std::to_string(ev.minCoeff()));
  }
  return DensityState(std::move(m));
}

DensityState DensityState::unchecked(ComplexMatrix m) { return DensityState(std::move(m)); }

DensityState DensityState::maximally_mixed(Eigen::Index dim) {
  return DensityState(identity(dim) / static_cast<double>(dim));
}

DensityState DensityState::pure(const ComplexVector& ket) {
  const double n = ket.norm();
  if (!(n > 0.0)) throw DimensionError("DensityState::pure: zero ket");
  const ComplexVector k = ket / n;
  return DensityState(k * k.adjoint());
}

DensityState DensityState::basis_projector(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) throw DimensionError("basis_projector: index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityState(std::move(m));
}

double DensityState::purity() const { return (m_ * m_).trace().real(); }

ComplexMatrix identity(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix pauli(Axis axis) {
  ComplexMatrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (axis) {
    case Axis::x:
      m << 0.0, 1.0, 1.0, 0.0;
      break;
    case Axis::y:
      m << 0.0, -i, i, 0.0;
      break;
    case Axis::z:
      m << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return m;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors) {
  if (factors.empty()) throw DimensionError("kron_all: no factors");
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

ComplexMatrix embed_single(const ComplexMatrix& op, int target, int n_qubits) {
  if (n_qubits < 1 || target < 0 || target >= n_qubits) {
    throw DimensionError("embed_single: qubit index out of range");
  }
  std::vector<ComplexMatrix> factors(static_cast<std::size_t>(n_qubits), identity(2));
  factors[static_cast<std::size_t>(target)] = op;
  return kron_all(factors);
}

ComplexMatrix collective_coupling(Axis axis, int n_qubits) {
  if (n_qubits < 1) throw DimensionError("collective_coupling: n_qubits must be >= 1");
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  const ComplexMatrix p = pauli(axis);
  for (int q = 0; q < n_qubits; ++q) out += embed_single(p, q, n_qubits);
  return out;
}

ComplexMatrix annihilation(Eigen::Index n_levels) {
  if (n_levels < 1) throw DimensionError("annihilation: n_levels must be >= 1");
  ComplexMatrix a = ComplexMatrix::Zero(n_levels, n_levels);
  for (Eigen::Index n = 1; n < n_levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dims(a, b, "commutator");
  return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dims(a, b, "anticommutator");
  return a * b + b * a;
}

ComplexMatrix superop_D(const ComplexMatrix& a, const DensityState& rho) {
  require_same_dims(a, rho.matrix(), "superop_D");
  return 0.5 * commutator(a, commutator(a, rho.matrix()));
}

ComplexMatrix superop_H(const ComplexMatrix& a, const DensityState& rho) {
  require_same_dims(a, rho.matrix(), "superop_H");
  const ComplexMatrix& r = rho.matrix();
  const Complex expect = (a * r).trace();
  return anticommutator(a, r) - 2.0 * expect * r;
}

ComplexMatrix backaction(const ComplexMatrix& v, const DensityState& rho) {
  require_same_dims(v, rho.matrix(), "backaction");
  const ComplexMatrix& r = rho.matrix();
  const ComplexMatrix vr = v * r;
  const double shift = 2.0 * vr.trace().real();
  return vr + vr.adjoint() - shift * r;
}

ComplexMatrix lindblad_dissipator(const ComplexMatrix& v, const DensityState& rho) {
  require_same_dims(v, rho.matrix(), "lindblad_dissipator");
  const ComplexMatrix& r = rho.matrix();
  const ComplexMatrix vdv_r = (v.adjoint() * v) * r;
  return v * r * v.adjoint() - 0.5 * (vdv_r + vdv_r.adjoint());
}

double trace_product_real(const ComplexMatrix& a, const ComplexMatrix& b) {
  // Tr(AB) = sum_ij A_ij B_ji
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const Complex x = a(i, j);
      const Complex y = b(j, i);
      acc += x.real() * y.real() - x.imag() * y.imag();
    }
  }
  return acc;
}

double fidelity_overlap(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dims(a, b, "fidelity_overlap");
  return std::clamp(trace_product_real(a, b), 0.0, 1.0);
}

double fidelity_overlap(const DensityState& a, const DensityState& b) {
  return fidelity_overlap(a.matrix(), b.matrix());
}

DensityState random_pure_state(Eigen::Index dim, std::uint64_t seed) {
  if (dim < 2) throw DimensionError("random_pure_state: dim must be >= 2");
  const CounterRng rng(mix64(seed ^ 0x5851f42d4c957f2dULL));
  ComplexVector ket(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto c = static_cast<std::uint64_t>(i);
    ket(i) = Complex(rng.normal(2 * c), rng.normal(2 * c + 1));
  }
  return DensityState::pure(ket);
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tolerance) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= tolerance;
}

RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  require_square(m, "hermitian_eigenvalues");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  return solver.eigenvalues();
}

DegeneracyReport degeneracy_report(const ComplexMatrix& a, const DensityState& rho) {
  if (!is_hermitian(a)) throw DimensionError("degeneracy_report: operator is not Hermitian");
  DegeneracyReport out;
  const RealVector ev = hermitian_eigenvalues(a);
  out.operator_eigenvalues.assign(ev.data(), ev.data() + ev.size());
  out.diffusion_norm = superop_H(a, rho).norm();
  out.is_degenerate = out.diffusion_norm < tol::kDegenerate;
  return out;
}

DensityState bell_psi_plus() {
  // Built entrywise so the 1/2 entries are exact.
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(1, 1) = m(1, 2) = m(2, 1) = m(2, 2) = 0.5;
  return DensityState::unchecked(std::move(m));
}

}  // namespace qfb
