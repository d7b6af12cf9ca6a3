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

#include "qfb/simulator.hpp"

#include <array>
#include <cmath>
#include <string>

namespace qfb {

void ZeroController::evaluate(const ComplexMatrix&, std::size_t, std::span<double> u) const {
  for (double& x : u) x = 0.0;
}

ScheduleController::ScheduleController(std::vector<RealVector> schedule)
    : schedule_(std::move(schedule)) {
  if (!schedule_.empty()) dim_ = static_cast<std::size_t>(schedule_.front().size());
  for (const auto& u : schedule_) {
    if (static_cast<std::size_t>(u.size()) != dim_) {
      throw DimensionError("ScheduleController: ragged control schedule");
    }
  }
}

void ScheduleController::evaluate(const ComplexMatrix&, std::size_t step,
                                  std::span<double> u) const {
  if (step >= schedule_.size()) {
    throw DimensionError("ScheduleController: step " + std::to_string(step) + " beyond schedule");
  }
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = schedule_[step](static_cast<Eigen::Index>(j));
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DimensionError("SimConfig: dt must be positive");
  if (n_steps < 1) throw DimensionError("SimConfig: n_steps must be >= 1");
}

StepWorkspace::StepWorkspace(Eigen::Index dim) { resize(dim); }

void StepWorkspace::resize(Eigen::Index dim) {
  for (ComplexMatrix* m : {&h, &hr, &vr, &vrv, &ddr, &incr, &shifted}) m->resize(dim, dim);
}

void em_increment(const QndSystem& sys, const ComplexMatrix& rho, std::span<const double> u,
                  double dw, double dt, StepWorkspace& ws) {
  if (rho.rows() != ws.incr.rows()) ws.resize(rho.rows());
  const Complex minus_i(0.0, -1.0);

  // Hamiltonian part -i[H, rho] with H = H0 + sum_j u_j H_j. Since H and rho
  // are Hermitian, rho H = (H rho)^+.
  if (sys.has_h0()) {
    ws.h = sys.h0();
  } else {
    ws.h.setZero();
  }
  for (std::size_t j = 0; j < u.size(); ++j) ws.h += u[j] * sys.control_hams()[j];
  ws.hr.noalias() = ws.h * rho;
  ws.incr = (minus_i * dt) * (ws.hr - ws.hr.adjoint());

  // Dissipator c (V rho V^+ - 1/2 {V^+ V, rho}).
  ws.vr.noalias() = sys.v() * rho;
  const double c_diss = sys.dissipation_scale();
  if (c_diss != 0.0) {
    ws.vrv.noalias() = ws.vr * sys.v_adjoint();
    ws.ddr.noalias() = sys.v_dag_v() * rho;
    ws.incr += (c_diss * dt) * (ws.vrv - 0.5 * (ws.ddr + ws.ddr.adjoint()));
  }

  // Back-action c (V rho + rho V^+ - Tr[(V + V^+) rho] rho) dW.
  const double c_diff = sys.diffusion_scale() * dw;
  if (c_diff != 0.0) {
    const double shift = 2.0 * ws.vr.trace().real();
    ws.incr += c_diff * (ws.vr + ws.vr.adjoint() - shift * rho);
  }
}

void project_state(ComplexMatrix& rho, const SimConfig& cfg, StepWorkspace& ws) {
  if (!rho.allFinite()) {
    throw NumericalError("state has non-finite entries; time step likely too large");
  }
  // Hermitize; the increment is Hermitian analytically so this only removes
  // rounding noise.
  const Eigen::Index n = rho.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    rho(j, j) = Complex(rho(j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Complex avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = avg;
      rho(j, i) = std::conj(avg);
    }
  }
  if (cfg.psd_projection) {
    // Cheap test first: rho + tol I is positive definite iff min eig > -tol.
    ws.shifted = rho;
    ws.shifted.diagonal().array() += tol::kPsd;
    ws.llt.compute(ws.shifted);
    if (ws.llt.info() != Eigen::Success) {
      ws.eig.compute(rho, Eigen::ComputeEigenvectors);
      if (ws.eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed");
      const RealVector clipped = ws.eig.eigenvalues().cwiseMax(0.0);
      const ComplexMatrix& q = ws.eig.eigenvectors();
      rho.noalias() = q * clipped.cast<Complex>().asDiagonal() * q.adjoint();
    }
  }
  if (cfg.renormalize) {
    const double tr = rho.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
      throw NumericalError("state trace collapsed to " + std::to_string(tr));
    }
    if (tr != 1.0) rho /= tr;
  }
}

void em_step_inplace(const QndSystem& sys, ComplexMatrix& rho, std::span<const double> u, double dw,
                     const SimConfig& cfg, StepWorkspace& ws) {
  for (const double uj : u) {
    if (!std::isfinite(uj)) throw NumericalError("control output is not finite");
  }
  em_increment(sys, rho, u, dw, cfg.dt, ws);
  rho += ws.incr;
  project_state(rho, cfg, ws);
}

DensityState em_step(const QndSystem& sys, const DensityState& rho, std::span<const double> u,
                     double dw, const SimConfig& cfg) {
  if (rho.dim() != sys.dim()) throw DimensionError("em_step: state dimension mismatch");
  if (u.size() != sys.control_dim()) throw DimensionError("em_step: control dimension mismatch");
  if (!std::isfinite(dw)) throw NumericalError("em_step: non-finite noise increment");
  cfg.validate();
  StepWorkspace ws(sys.dim());
  ComplexMatrix next = rho.matrix();
  em_step_inplace(sys, next, u, dw, cfg, ws);
  return DensityState::unchecked(std::move(next));
}

void simulate(const QndSystem& sys, const Controller& controller, const ComplexMatrix& rho0,
              const CostSpec& cost, const SimConfig& cfg, const NoiseStream& noise,
              StepObserver& observer, StepWorkspace& ws) {
  if (controller.control_dim() != sys.control_dim()) {
    throw DimensionError("simulate: controller has " + std::to_string(controller.control_dim()) +
                         " outputs, system has " + std::to_string(sys.control_dim()) +
                         " control channels");
  }
  if (rho0.rows() != sys.dim()) throw DimensionError("simulate: initial state dimension mismatch");
  ws.resize(sys.dim());
  // Control vectors are tiny; keep them on the stack.
  constexpr std::size_t kMaxControls = 64;
  if (sys.control_dim() > kMaxControls) throw DimensionError("simulate: too many control channels");
  std::array<double, kMaxControls> u_buf{};
  const std::span<double> u(u_buf.data(), sys.control_dim());

  ComplexMatrix rho = rho0;
  for (std::size_t t = 0; t < cfg.n_steps; ++t) {
    controller.evaluate(rho, t, u);
    const RunningCostParts parts = running_cost_parts(rho, u, cost, cfg.dt);
    const double dw = noise.increment(t);
    const double dy = dw + 2.0 * trace_product_real(sys.v(), rho) * cfg.dt;
    observer.on_step(t, rho, u, dw, dy, parts);
    em_step_inplace(sys, rho, u, dw, cfg, ws);
  }
  observer.on_final(rho);
}

namespace {

class Recorder final : public StepObserver {
 public:
  Recorder(Trajectory& traj, std::size_t n_steps) : traj_(traj) {
    traj_.states.reserve(n_steps + 1);
    traj_.controls.reserve(n_steps);
    traj_.noise.reserve(n_steps);
    traj_.record.reserve(n_steps);
    traj_.running_cost.reserve(n_steps);
  }
  void on_step(std::size_t, const ComplexMatrix& rho, std::span<const double> u, double dw,
               double dy, const RunningCostParts& cost) override {
    traj_.states.push_back(DensityState::unchecked(rho));
    traj_.controls.emplace_back(Eigen::Map<const RealVector>(u.data(), static_cast<Eigen::Index>(u.size())));
    traj_.noise.push_back(dw);
    traj_.record.push_back(dy);
    traj_.running_cost.push_back(cost.total());
  }
  void on_final(const ComplexMatrix& rho) override {
    traj_.states.push_back(DensityState::unchecked(rho));
  }

 private:
  Trajectory& traj_;
};

}  // namespace

Trajectory rollout(const QndSystem& sys, const Controller& controller, const DensityState& rho0,
                   const CostSpec& cost, const SimConfig& cfg, const NoiseStream& noise) {
  cfg.validate();
  cost.validate(sys.control_dim());
  Trajectory traj;
  traj.dt = cfg.dt;
  Recorder recorder(traj, cfg.n_steps);
  StepWorkspace ws(sys.dim());
  simulate(sys, controller, rho0.matrix(), cost, cfg, noise, recorder, ws);
  return traj;
}

double rollout_cost(const QndSystem& sys, const Controller& controller, const ComplexMatrix& rho0,
                    const CostSpec& cost, const SimConfig& cfg, const NoiseStream& noise,
                    StepWorkspace& ws) {
  CostAccumulator acc(cost);
  simulate(sys, controller, rho0, cost, cfg, noise, acc, ws);
  return acc.total();
}

std::vector<DensityState> lindblad_propagate(const QndSystem& sys, const DensityState& rho0,
                                             const std::vector<RealVector>& u_sequence,
                                             const SimConfig& cfg) {
  cfg.validate();
  if (rho0.dim() != sys.dim()) throw DimensionError("lindblad_propagate: dimension mismatch");
  if (u_sequence.size() < cfg.n_steps) {
    throw DimensionError("lindblad_propagate: control sequence shorter than n_steps");
  }
  std::vector<DensityState> out;
  out.reserve(cfg.n_steps + 1);
  StepWorkspace ws(sys.dim());
  ComplexMatrix rho = rho0.matrix();
  out.push_back(rho0);
  for (std::size_t t = 0; t < cfg.n_steps; ++t) {
    const RealVector& u = u_sequence[t];
    if (static_cast<std::size_t>(u.size()) != sys.control_dim()) {
      throw DimensionError("lindblad_propagate: control dimension mismatch");
    }
    em_step_inplace(sys, rho, {u.data(), static_cast<std::size_t>(u.size())}, 0.0, cfg, ws);
    out.push_back(DensityState::unchecked(rho));
  }
  return out;
}

}  // namespace qfb
