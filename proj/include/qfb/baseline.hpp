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

#include <vector>

#include "qfb/controller.hpp"
#include "qfb/systems.hpp"

namespace qfb {

/// Two-term comparison feedback law
///   u_j = gain_fidelity_j (1 - Tr[rho_des rho]) + gain_gradient_j Re Tr(i[H_j, rho] rho_des).
/// With gain_gradient = 0 this is a proportional controller on the infidelity.
struct BaselineSpec {
  std::vector<double> gain_fidelity;
  std::vector<double> gain_gradient;

  void validate(std::size_t control_dim) const;
};

/// Pure fidelity-proportional default with equal gain on every channel.
BaselineSpec default_baseline_spec(std::size_t control_dim, double gain = 2.0);

RealVector baseline_eval(const BaselineSpec& spec, const QndSystem& sys, const DensityState& rho,
                         const DensityState& target);

class BaselineController final : public Controller {
 public:
  BaselineController(BaselineSpec spec, const QndSystem& sys, DensityState target);

  std::size_t control_dim() const override { return spec_.gain_fidelity.size(); }
  void evaluate(const ComplexMatrix& rho, std::size_t step, std::span<double> u) const override;

 private:
  BaselineSpec spec_;
  std::vector<ComplexMatrix> control_hams_;
  /// i (rho_des H_j - H_j rho_des), so that Re Tr(i[H_j, rho] rho_des) = Re Tr(rho M_j).
  std::vector<ComplexMatrix> gradient_ops_;
  DensityState target_;
  bool use_gradient_ = false;
};

}  // namespace qfb
