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

#include "qfb/cost.hpp"

#include <cmath>
#include <string>

namespace qfb {

void CostSpec::validate(std::size_t control_dim) const {
  if (target.dim() == 0) throw DimensionError("CostSpec: target state not set");
  if (!(state_weight >= 0.0)) throw DimensionError("CostSpec: Q_s must be nonnegative");
  if (control_weights.size() != control_dim) {
    throw DimensionError("CostSpec: Q_u has " + std::to_string(control_weights.size()) +
                         " entries, expected " + std::to_string(control_dim));
  }
  for (double w : control_weights) {
    if (!(w >= 0.0)) throw DimensionError("CostSpec: Q_u entries must be nonnegative");
  }
  if (!(q_alpha > 0.0)) throw DimensionError("CostSpec: alpha must be positive");
  if (!(q_beta > 0.0)) throw DimensionError("CostSpec: beta must be positive");
  if (!(terminal_weight >= 0.0)) throw DimensionError("CostSpec: terminal weight must be >= 0");
}

CostSpec default_cost_spec(DensityState target, std::size_t control_dim) {
  CostSpec spec;
  spec.target = std::move(target);
  spec.control_weights.assign(control_dim, 0.01);
  return spec;
}

double q_resolve(double x, double alpha, double beta) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DimensionError("q_resolve: argument " + std::to_string(x) + " outside [0, 1]");
  }
  return alpha * std::log1p(beta * x) / std::log1p(beta);
}

RunningCostParts running_cost_parts(const ComplexMatrix& rho, std::span<const double> u,
                                    const CostSpec& spec, double dt) {
  const double infidelity = 1.0 - fidelity_overlap(spec.target.matrix(), rho);
  RunningCostParts parts;
  parts.state = spec.state_weight * q_resolve(infidelity, spec.q_alpha, spec.q_beta) * dt;
  double effort = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) effort += spec.control_weights[j] * u[j] * u[j];
  parts.control = effort * dt;
  return parts;
}

double running_cost(const DensityState& rho, std::span<const double> u, const CostSpec& spec,
                    double dt) {
  if (u.size() != spec.control_weights.size()) {
    throw DimensionError("running_cost: control dimension mismatch");
  }
  return running_cost_parts(rho.matrix(), u, spec, dt).total();
}

double terminal_cost(const ComplexMatrix& rho_final, const CostSpec& spec) {
  if (spec.terminal_weight == 0.0) return 0.0;
  const double infidelity = 1.0 - fidelity_overlap(spec.target.matrix(), rho_final);
  return spec.terminal_weight * q_resolve(infidelity, spec.q_alpha, spec.q_beta);
}

double trajectory_cost(const Trajectory& traj, const CostSpec& spec) {
  double total = 0.0;
  for (std::size_t t = 0; t < traj.n_steps(); ++t) {
    const RealVector& u = traj.controls[t];
    total += running_cost_parts(traj.states[t].matrix(), {u.data(), static_cast<std::size_t>(u.size())},
                                spec, traj.dt)
                 .total();
  }
  return total + terminal_cost(traj.states.back().matrix(), spec);
}

CostCurves running_cost_decomposition(const Trajectory& traj, const CostSpec& spec) {
  CostCurves curves;
  curves.state.assign(traj.n_steps() + 1, 0.0);
  curves.control.assign(traj.n_steps() + 1, 0.0);
  for (std::size_t t = 0; t < traj.n_steps(); ++t) {
    const RealVector& u = traj.controls[t];
    const RunningCostParts parts = running_cost_parts(
        traj.states[t].matrix(), {u.data(), static_cast<std::size_t>(u.size())}, spec, traj.dt);
    curves.state[t + 1] = curves.state[t] + parts.state;
    curves.control[t + 1] = curves.control[t] + parts.control;
  }
  return curves;
}

double shape(double cost, const ShapeSpec& spec) { return std::exp(-spec.kappa * cost); }

}  // namespace qfb
