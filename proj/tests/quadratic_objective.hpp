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

#include "qfb/gass.hpp"

namespace qfb::testing {

/// J(phi) = |phi - phi*|^2 in place of the simulator, one identical column
/// per rollout.
class QuadraticObjective final : public BatchObjective {
 public:
  QuadraticObjective(RealVector optimum, std::size_t rollouts)
      : optimum_(std::move(optimum)), rollouts_(rollouts) {}

  Eigen::MatrixXd evaluate(std::uint64_t, const std::vector<ParamVector>& samples) override {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(rollouts_));
    for (std::size_t p = 0; p < samples.size(); ++p) {
      j.row(static_cast<Eigen::Index>(p)).setConstant((samples[p] - optimum_).squaredNorm());
    }
    return j;
  }

 private:
  RealVector optimum_;
  std::size_t rollouts_;
};

}  // namespace qfb::testing
