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

#include <cstddef>
#include <span>
#include <vector>

#include "qfb/qmath.hpp"

namespace qfb {

/// Maps the current conditioned state (and step index) to a control vector.
/// Implementations must be safe to call concurrently from several threads.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::size_t control_dim() const = 0;
  virtual void evaluate(const ComplexMatrix& rho, std::size_t step, std::span<double> u) const = 0;
};

class ZeroController final : public Controller {
 public:
  explicit ZeroController(std::size_t control_dim) : dim_(control_dim) {}
  std::size_t control_dim() const override { return dim_; }
  void evaluate(const ComplexMatrix&, std::size_t, std::span<double> u) const override;

 private:
  std::size_t dim_;
};

/// Replays a fixed control sequence, one vector per step.
class ScheduleController final : public Controller {
 public:
  explicit ScheduleController(std::vector<RealVector> schedule);
  std::size_t control_dim() const override { return dim_; }
  void evaluate(const ComplexMatrix&, std::size_t step, std::span<double> u) const override;

 private:
  std::vector<RealVector> schedule_;
  std::size_t dim_ = 0;
};

}  // namespace qfb
