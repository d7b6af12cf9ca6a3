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
#include <vector>

#include "qfb/qmath.hpp"
#include "qfb/trajectory.hpp"

namespace qfb {

/// Running cost
///   [Q_s q(1 - Tr[rho_des rho]) + sum_j Q_u,j u_j^2] dt
/// with the log resolution map q(x) = alpha log(1 + beta x) / log(1 + beta),
/// plus an optional terminal term terminal_weight * q(1 - Tr[rho_des rho_T]).
struct CostSpec {
  DensityState target;
  double state_weight = 1.0;
  std::vector<double> control_weights;
  double q_alpha = 1.0;
  double q_beta = 9.0;
  double terminal_weight = 0.0;

  /// Throws DimensionError unless weights are nonnegative, alpha, beta > 0
  /// and there is one control weight per channel.
  void validate(std::size_t control_dim) const;
};

CostSpec default_cost_spec(DensityState target, std::size_t control_dim);

struct ShapeSpec {
  double kappa = 1.0;
};

/// Angle-resolution map [0, 1] -> [0, alpha].
double q_resolve(double x, double alpha, double beta);

struct RunningCostParts {
  double state = 0.0;
  double control = 0.0;
  double total() const { return state + control; }
};

/// Both parts already multiplied by dt.
RunningCostParts running_cost_parts(const ComplexMatrix& rho, std::span<const double> u,
                                    const CostSpec& spec, double dt);
double running_cost(const DensityState& rho, std::span<const double> u, const CostSpec& spec,
                    double dt);
double terminal_cost(const ComplexMatrix& rho_final, const CostSpec& spec);

/// Recomputes the running costs of `traj` under `spec` and adds the terminal term.
double trajectory_cost(const Trajectory& traj, const CostSpec& spec);

struct CostCurves {
  /// Cumulative values on the time grid t_k = k dt, k = 0..n_steps; both start at 0.
  std::vector<double> state;
  std::vector<double> control;
};

CostCurves running_cost_decomposition(const Trajectory& traj, const CostSpec& spec);

/// S(J) = exp(-kappa J).
double shape(double cost, const ShapeSpec& spec);

}  // namespace qfb
