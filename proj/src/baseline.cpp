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

#include "qfb/baseline.hpp"

#include <string>

namespace qfb {

void BaselineSpec::validate(std::size_t control_dim) const {
  if (gain_fidelity.size() != control_dim || gain_gradient.size() != control_dim) {
    throw DimensionError("BaselineSpec: gain vectors must have " + std::to_string(control_dim) +
                         " entries");
  }
}

BaselineSpec default_baseline_spec(std::size_t control_dim, double gain) {
  return BaselineSpec{std::vector<double>(control_dim, gain), std::vector<double>(control_dim, 0.0)};
}

BaselineController::BaselineController(BaselineSpec spec, const QndSystem& sys, DensityState target)
    : spec_(std::move(spec)), control_hams_(sys.control_hams()), target_(std::move(target)) {
  spec_.validate(sys.control_dim());
  if (target_.dim() != sys.dim()) throw DimensionError("BaselineController: target dimension mismatch");
  const Complex i(0.0, 1.0);
  // Tr(i[H, rho] R) = Tr(rho * i(R H - H R)) by cyclicity.
  for (const auto& h : control_hams_) {
    const ComplexMatrix& r = target_.matrix();
    gradient_ops_.push_back(i * (r * h - h * r));
  }
  for (double g : spec_.gain_gradient) use_gradient_ = use_gradient_ || g != 0.0;
}

void BaselineController::evaluate(const ComplexMatrix& rho, std::size_t, std::span<double> u) const {
  if (u.size() != control_dim()) throw DimensionError("BaselineController: control size mismatch");
  if (rho.rows() != target_.dim()) throw DimensionError("BaselineController: state dimension mismatch");
  const double infidelity = 1.0 - fidelity_overlap(target_.matrix(), rho);
  for (std::size_t j = 0; j < u.size(); ++j) {
    double value = spec_.gain_fidelity[j] * infidelity;
    if (use_gradient_) value += spec_.gain_gradient[j] * trace_product_real(rho, gradient_ops_[j]);
    u[j] = value;
  }
}

RealVector baseline_eval(const BaselineSpec& spec, const QndSystem& sys, const DensityState& rho,
                         const DensityState& target) {
  if (rho.dim() != sys.dim()) throw DimensionError("baseline_eval: state dimension mismatch");
  const BaselineController ctrl(spec, sys, target);
  RealVector u(static_cast<Eigen::Index>(ctrl.control_dim()));
  ctrl.evaluate(rho.matrix(), 0, {u.data(), ctrl.control_dim()});
  return u;
}

}  // namespace qfb
