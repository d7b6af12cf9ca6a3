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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qfb/controller.hpp"
#include "qfb/qmath.hpp"

namespace qfb {

using ParamVector = RealVector;

enum class PolicyKind { open_loop, linear, mlp };

/// Real encoding of a density matrix fed to feedback policies.
///  - pauli: c_P = Re Tr(P rho) over the n-qubit Pauli product basis, label
///    index in base 4 with qubit 0 as the most significant digit (I, X, Y, Z).
///  - raw_entries: diagonal reals, then (Re, Im) of each upper-triangle entry
///    in row-major order. Used for non-qubit systems.
/// Either way there are dim^2 features.
enum class FeatureMap { pauli, raw_entries };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& name);
std::string to_string(FeatureMap map);
FeatureMap parse_feature_map(const std::string& name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::linear;
  FeatureMap feature_map = FeatureMap::pauli;
  std::size_t control_dim = 0;
  std::size_t n_features = 0;
  /// Hidden layer widths, mlp only.
  std::vector<std::size_t> hidden_widths;
  /// Number of table rows, open_loop only.
  std::size_t horizon = 0;

  void validate() const;
  bool operator==(const PolicySpec&) const = default;
};

PolicySpec linear_policy_spec(FeatureMap map, Eigen::Index dim, std::size_t control_dim);
PolicySpec mlp_policy_spec(FeatureMap map, Eigen::Index dim, std::size_t control_dim,
                           std::vector<std::size_t> hidden_widths);
PolicySpec open_loop_policy_spec(std::size_t control_dim, std::size_t horizon);

std::size_t param_count(const PolicySpec& spec);

std::size_t feature_count(Eigen::Index dim);
std::vector<std::string> feature_labels(FeatureMap map, Eigen::Index dim);
void featurize_into(FeatureMap map, const ComplexMatrix& rho, std::span<double> out);
RealVector featurize(FeatureMap map, const DensityState& rho);
/// Pauli features of a qubit register; throws for non power-of-two dims.
RealVector featurize(const DensityState& rho);
/// Inverse of the Pauli encoding: rho = (1/dim) sum_P c_P P.
ComplexMatrix reconstruct_from_pauli(std::span<const double> features, Eigen::Index dim);

/// u = K1 features + K2, K1 row-major followed by K2.
RealVector linear_eval(const PolicySpec& spec, const ParamVector& params, const DensityState& rho);
/// Fully connected ReLU network with a linear output layer; per layer
/// weights row-major (out x in) followed by the bias.
RealVector mlp_eval(const PolicySpec& spec, const ParamVector& params, const DensityState& rho);
RealVector open_loop_eval(const PolicySpec& spec, const ParamVector& params, std::size_t t_index);

/// LeCun normal initialization: weights N(0, 1/fan_in), biases 0. Open-loop
/// tables start at zero.
ParamVector init_params(const PolicySpec& spec, std::uint64_t seed);

/// A PolicySpec bound to one parameter vector.
class Policy final : public Controller {
 public:
  Policy(PolicySpec spec, ParamVector params);

  std::size_t control_dim() const override { return spec_.control_dim; }
  void evaluate(const ComplexMatrix& rho, std::size_t step, std::span<double> u) const override;

  const PolicySpec& spec() const { return spec_; }
  const ParamVector& params() const { return params_; }

 private:
  PolicySpec spec_;
  ParamVector params_;
  std::vector<std::size_t> layer_sizes_;
};

}  // namespace qfb
