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

#include "qfb/qmath.hpp"

namespace qfb {

/// One simulated path. `states` has n_steps + 1 entries; the per-step
/// sequences have n_steps entries, where entry t belongs to the interval
/// [t dt, (t + 1) dt) and was computed from states[t].
struct Trajectory {
  double dt = 0.0;
  std::vector<DensityState> states;
  std::vector<RealVector> controls;
  std::vector<double> noise;
  /// Measurement record increments dy = dW + Tr[(V + V^+) rho] dt.
  std::vector<double> record;
  std::vector<double> running_cost;

  std::size_t n_steps() const { return noise.size(); }
};

}  // namespace qfb
