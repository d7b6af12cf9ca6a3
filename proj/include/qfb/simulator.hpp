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

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qfb/controller.hpp"
#include "qfb/cost.hpp"
#include "qfb/qmath.hpp"
#include "qfb/rng.hpp"
#include "qfb/systems.hpp"
#include "qfb/trajectory.hpp"

namespace qfb {

struct SimConfig {
  double dt = 1e-3;
  std::size_t n_steps = 1000;
  /// Divide by the trace after each step.
  bool renormalize = true;
  /// Clip negative eigenvalues below -tol::kPsd after each step.
  bool psd_projection = true;

  void validate() const;
};

/// Scratch matrices for one thread's step kernel.
struct StepWorkspace {
  explicit StepWorkspace(Eigen::Index dim = 0);
  void resize(Eigen::Index dim);

  ComplexMatrix h, hr, vr, vrv, ddr, incr, shifted;
  Eigen::LLT<ComplexMatrix> llt;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig;
};

/// Pre-projection Euler-Maruyama increment
///   [F(rho) + G(rho, u)] dt + B(rho) dW
/// written into `ws.incr`. Every term is traceless and Hermitian.
void em_increment(const QndSystem& sys, const ComplexMatrix& rho, std::span<const double> u,
                  double dw, double dt, StepWorkspace& ws);

/// Hermitize, optionally repair positivity and renormalize. Throws
/// NumericalError on non-finite entries or a collapsed trace.
void project_state(ComplexMatrix& rho, const SimConfig& cfg, StepWorkspace& ws);

/// In-place step rho <- project(rho + increment).
void em_step_inplace(const QndSystem& sys, ComplexMatrix& rho, std::span<const double> u, double dw,
                     const SimConfig& cfg, StepWorkspace& ws);

DensityState em_step(const QndSystem& sys, const DensityState& rho, std::span<const double> u,
                     double dw, const SimConfig& cfg);

/// Produces dW_t for one rollout. A null stream yields zeros (deterministic flow).
class NoiseStream {
 public:
  static NoiseStream zero() { return NoiseStream(); }
  NoiseStream(CounterRng rng, double dt) : rng_(rng), sqrt_dt_(std::sqrt(dt)), active_(true) {}

  double increment(std::size_t step) const {
    return active_ ? sqrt_dt_ * rng_.normal(step) : 0.0;
  }

 private:
  NoiseStream() : rng_(0) {}
  CounterRng rng_;
  double sqrt_dt_ = 0.0;
  bool active_ = false;
};

/// Receives every step of a simulation. `on_step` sees the state before the
/// step is applied together with the control and cost computed from it.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_step(std::size_t step, const ComplexMatrix& rho, std::span<const double> u,
                       double dw, double dy, const RunningCostParts& cost) = 0;
  virtual void on_final(const ComplexMatrix& rho) = 0;
};

/// Core closed-loop integration loop shared by every rollout flavor.
void simulate(const QndSystem& sys, const Controller& controller, const ComplexMatrix& rho0,
              const CostSpec& cost, const SimConfig& cfg, const NoiseStream& noise,
              StepObserver& observer, StepWorkspace& ws);

/// Accumulates the total cost only.
class CostAccumulator final : public StepObserver {
 public:
  explicit CostAccumulator(const CostSpec& spec) : spec_(spec) {}
  void on_step(std::size_t, const ComplexMatrix&, std::span<const double>, double, double,
               const RunningCostParts& cost) override {
    total_ += cost.total();
  }
  void on_final(const ComplexMatrix& rho) override { total_ += terminal_cost(rho, spec_); }
  double total() const { return total_; }

 private:
  const CostSpec& spec_;
  double total_ = 0.0;
};

Trajectory rollout(const QndSystem& sys, const Controller& controller, const DensityState& rho0,
                   const CostSpec& cost, const SimConfig& cfg, const NoiseStream& noise);

double rollout_cost(const QndSystem& sys, const Controller& controller, const ComplexMatrix& rho0,
                    const CostSpec& cost, const SimConfig& cfg, const NoiseStream& noise,
                    StepWorkspace& ws);

/// Deterministic Euler integration with the diffusion term dropped (the
/// noise-averaged, Lindblad flow). Returns n_steps + 1 states.
std::vector<DensityState> lindblad_propagate(const QndSystem& sys, const DensityState& rho0,
                                             const std::vector<RealVector>& u_sequence,
                                             const SimConfig& cfg);

}  // namespace qfb
