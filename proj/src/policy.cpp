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

#include "qfb/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "qfb/rng.hpp"

namespace qfb {

namespace {

constexpr int kMaxQubits = 4;

/// Sparse form of one Pauli string: row i has a single nonzero at column
/// col[i] with value phase[i].
struct PauliString {
  std::vector<Eigen::Index> col;
  std::vector<Complex> phase;
};

using PauliTable = std::vector<PauliString>;

PauliTable build_table(int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  const std::size_t n_labels = std::size_t{1} << (2 * n_qubits);
  const Complex i(0.0, 1.0);
  PauliTable table(n_labels);
  for (std::size_t label = 0; label < n_labels; ++label) {
    PauliString& ps = table[label];
    ps.col.resize(static_cast<std::size_t>(dim));
    ps.phase.resize(static_cast<std::size_t>(dim));
    for (Eigen::Index row = 0; row < dim; ++row) {
      Eigen::Index col = 0;
      Complex phase = 1.0;
      for (int q = 0; q < n_qubits; ++q) {
        const int digit = static_cast<int>((label >> (2 * (n_qubits - 1 - q))) & 3U);
        const int bit = static_cast<int>((row >> (n_qubits - 1 - q)) & 1);
        int out_bit = bit;
        switch (digit) {
          case 0:
            break;
          case 1:
            out_bit = 1 - bit;
            break;
          case 2:
            out_bit = 1 - bit;
            phase *= bit == 0 ? -i : i;
            break;
          case 3:
            phase *= bit == 0 ? 1.0 : -1.0;
            break;
        }
        col |= static_cast<Eigen::Index>(out_bit) << (n_qubits - 1 - q);
      }
      ps.col[static_cast<std::size_t>(row)] = col;
      ps.phase[static_cast<std::size_t>(row)] = phase;
    }
  }
  return table;
}

const PauliTable& pauli_table(int n_qubits) {
  static const std::array<PauliTable, kMaxQubits + 1> tables = [] {
    std::array<PauliTable, kMaxQubits + 1> t;
    for (int n = 1; n <= kMaxQubits; ++n) t[static_cast<std::size_t>(n)] = build_table(n);
    return t;
  }();
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw DimensionError("Pauli features support 1.." + std::to_string(kMaxQubits) + " qubits");
  }
  return tables[static_cast<std::size_t>(n_qubits)];
}

int qubits_for_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || n == 0) {
    throw DimensionError("Pauli features need a power-of-two dimension, got " + std::to_string(dim));
  }
  return n;
}

std::vector<std::size_t> layer_sizes(const PolicySpec& spec) {
  std::vector<std::size_t> sizes{spec.n_features};
  if (spec.kind == PolicyKind::mlp) {
    sizes.insert(sizes.end(), spec.hidden_widths.begin(), spec.hidden_widths.end());
  }
  sizes.push_back(spec.control_dim);
  return sizes;
}

void require_params(const PolicySpec& spec, const ParamVector& params) {
  if (static_cast<std::size_t>(params.size()) != param_count(spec)) {
    throw DimensionError("policy expects " + std::to_string(param_count(spec)) +
                         " parameters, got " + std::to_string(params.size()));
  }
}

// Forward pass shared by linear and mlp; `features` is consumed as scratch.
void forward(const std::vector<std::size_t>& sizes, const double* params,
             std::span<const double> features, std::span<double> u) {
  thread_local std::vector<double> act_in;
  thread_local std::vector<double> act_out;
  act_in.assign(features.begin(), features.end());
  const double* p = params;
  for (std::size_t layer = 0; layer + 1 < sizes.size(); ++layer) {
    const std::size_t n_in = sizes[layer];
    const std::size_t n_out = sizes[layer + 1];
    const bool last = layer + 2 == sizes.size();
    act_out.assign(n_out, 0.0);
    const double* bias = p + n_in * n_out;
    for (std::size_t o = 0; o < n_out; ++o) {
      double acc = 0.0;
      const double* w = p + o * n_in;
      for (std::size_t k = 0; k < n_in; ++k) acc += w[k] * act_in[k];
      acc += bias[o];
      act_out[o] = last ? acc : std::max(acc, 0.0);
    }
    p = bias + n_out;
    std::swap(act_in, act_out);
  }
  std::copy(act_in.begin(), act_in.end(), u.begin());
}

}  // namespace

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::open_loop:
      return "open_loop";
    case PolicyKind::linear:
      return "linear";
    case PolicyKind::mlp:
      return "mlp";
  }
  return "?";
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "open_loop") return PolicyKind::open_loop;
  if (name == "linear") return PolicyKind::linear;
  if (name == "mlp") return PolicyKind::mlp;
  throw DimensionError("unknown policy kind '" + name + "'");
}

std::string to_string(FeatureMap map) { return map == FeatureMap::pauli ? "pauli" : "raw_entries"; }

FeatureMap parse_feature_map(const std::string& name) {
  if (name == "pauli") return FeatureMap::pauli;
  if (name == "raw_entries") return FeatureMap::raw_entries;
  throw DimensionError("unknown feature map '" + name + "'");
}

void PolicySpec::validate() const {
  if (control_dim == 0) throw DimensionError("PolicySpec: control_dim must be positive");
  switch (kind) {
    case PolicyKind::open_loop:
      if (horizon == 0) throw DimensionError("PolicySpec: open-loop horizon must be positive");
      break;
    case PolicyKind::linear:
      if (!hidden_widths.empty()) throw DimensionError("PolicySpec: linear policy has no hidden layers");
      [[fallthrough]];
    case PolicyKind::mlp:
      if (n_features == 0) throw DimensionError("PolicySpec: n_features must be positive");
      for (std::size_t w : hidden_widths) {
        if (w == 0) throw DimensionError("PolicySpec: hidden widths must be positive");
      }
      break;
  }
}

PolicySpec linear_policy_spec(FeatureMap map, Eigen::Index dim, std::size_t control_dim) {
  PolicySpec spec;
  spec.kind = PolicyKind::linear;
  spec.feature_map = map;
  spec.control_dim = control_dim;
  spec.n_features = feature_count(dim);
  return spec;
}

PolicySpec mlp_policy_spec(FeatureMap map, Eigen::Index dim, std::size_t control_dim,
                           std::vector<std::size_t> hidden_widths) {
  PolicySpec spec = linear_policy_spec(map, dim, control_dim);
  spec.kind = PolicyKind::mlp;
  spec.hidden_widths = std::move(hidden_widths);
  return spec;
}

PolicySpec open_loop_policy_spec(std::size_t control_dim, std::size_t horizon) {
  PolicySpec spec;
  spec.kind = PolicyKind::open_loop;
  spec.control_dim = control_dim;
  spec.horizon = horizon;
  return spec;
}

std::size_t param_count(const PolicySpec& spec) {
  if (spec.kind == PolicyKind::open_loop) return spec.horizon * spec.control_dim;
  const std::vector<std::size_t> sizes = layer_sizes(spec);
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l] * sizes[l + 1] + sizes[l + 1];
  return n;
}

std::size_t feature_count(Eigen::Index dim) { return static_cast<std::size_t>(dim * dim); }

std::vector<std::string> feature_labels(FeatureMap map, Eigen::Index dim) {
  std::vector<std::string> labels;
  if (map == FeatureMap::pauli) {
    const int n = qubits_for_dim(dim);
    const char names[4] = {'I', 'X', 'Y', 'Z'};
    for (std::size_t label = 0; label < (std::size_t{1} << (2 * n)); ++label) {
      std::string s;
      for (int q = 0; q < n; ++q) s += names[(label >> (2 * (n - 1 - q))) & 3U];
      labels.push_back(s);
    }
    return labels;
  }
  for (Eigen::Index i = 0; i < dim; ++i) labels.push_back("re" + std::to_string(i) + std::to_string(i));
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      labels.push_back("re" + std::to_string(i) + "_" + std::to_string(j));
      labels.push_back("im" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  return labels;
}

void featurize_into(FeatureMap map, const ComplexMatrix& rho, std::span<double> out) {
  const Eigen::Index dim = rho.rows();
  if (out.size() != feature_count(dim)) throw DimensionError("featurize: output size mismatch");
  if (map == FeatureMap::pauli) {
    const PauliTable& table = pauli_table(qubits_for_dim(dim));
    for (std::size_t label = 0; label < table.size(); ++label) {
      const PauliString& ps = table[label];
      double acc = 0.0;
      for (Eigen::Index row = 0; row < dim; ++row) {
        const auto r = static_cast<std::size_t>(row);
        acc += (ps.phase[r] * rho(ps.col[r], row)).real();
      }
      out[label] = acc;
    }
    return;
  }
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < dim; ++i) out[k++] = rho(i, i).real();
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      out[k++] = rho(i, j).real();
      out[k++] = rho(i, j).imag();
    }
  }
}

RealVector featurize(FeatureMap map, const DensityState& rho) {
  RealVector out(static_cast<Eigen::Index>(feature_count(rho.dim())));
  featurize_into(map, rho.matrix(), {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

RealVector featurize(const DensityState& rho) { return featurize(FeatureMap::pauli, rho); }

ComplexMatrix reconstruct_from_pauli(std::span<const double> features, Eigen::Index dim) {
  const PauliTable& table = pauli_table(qubits_for_dim(dim));
  if (features.size() != table.size()) throw DimensionError("reconstruct: feature count mismatch");
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  for (std::size_t label = 0; label < table.size(); ++label) {
    const PauliString& ps = table[label];
    for (Eigen::Index row = 0; row < dim; ++row) {
      const auto r = static_cast<std::size_t>(row);
      rho(row, ps.col[r]) += features[label] * ps.phase[r];
    }
  }
  return rho / static_cast<double>(dim);
}

RealVector linear_eval(const PolicySpec& spec, const ParamVector& params, const DensityState& rho) {
  if (spec.kind != PolicyKind::linear) throw DimensionError("linear_eval: spec is not linear");
  require_params(spec, params);
  RealVector u(static_cast<Eigen::Index>(spec.control_dim));
  Policy(spec, params).evaluate(rho.matrix(), 0, {u.data(), spec.control_dim});
  return u;
}

RealVector mlp_eval(const PolicySpec& spec, const ParamVector& params, const DensityState& rho) {
  if (spec.kind != PolicyKind::mlp) throw DimensionError("mlp_eval: spec is not mlp");
  require_params(spec, params);
  RealVector u(static_cast<Eigen::Index>(spec.control_dim));
  Policy(spec, params).evaluate(rho.matrix(), 0, {u.data(), spec.control_dim});
  return u;
}

RealVector open_loop_eval(const PolicySpec& spec, const ParamVector& params, std::size_t t_index) {
  if (spec.kind != PolicyKind::open_loop) throw DimensionError("open_loop_eval: spec is not open loop");
  require_params(spec, params);
  if (t_index >= spec.horizon) {
    throw DimensionError("open_loop_eval: step " + std::to_string(t_index) + " outside horizon " +
                         std::to_string(spec.horizon));
  }
  return params.segment(static_cast<Eigen::Index>(t_index * spec.control_dim),
                        static_cast<Eigen::Index>(spec.control_dim));
}

ParamVector init_params(const PolicySpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector params = ParamVector::Zero(static_cast<Eigen::Index>(param_count(spec)));
  if (spec.kind == PolicyKind::open_loop) return params;
  const CounterRng rng(mix64(seed ^ 0x3c6ef372fe94f82bULL));
  const std::vector<std::size_t> sizes = layer_sizes(spec);
  std::size_t offset = 0;
  std::uint64_t counter = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t n_in = sizes[l];
    const std::size_t n_out = sizes[l + 1];
    const double stddev = 1.0 / std::sqrt(static_cast<double>(n_in));
    for (std::size_t k = 0; k < n_in * n_out; ++k) {
      params(static_cast<Eigen::Index>(offset + k)) = stddev * rng.normal(counter++);
    }
    offset += n_in * n_out + n_out;
  }
  return params;
}

Policy::Policy(PolicySpec spec, ParamVector params) : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  require_params(spec_, params_);
  if (spec_.kind != PolicyKind::open_loop) layer_sizes_ = layer_sizes(spec_);
}

void Policy::evaluate(const ComplexMatrix& rho, std::size_t step, std::span<double> u) const {
  if (u.size() != spec_.control_dim) throw DimensionError("Policy: control buffer size mismatch");
  if (spec_.kind == PolicyKind::open_loop) {
    if (step >= spec_.horizon) {
      throw DimensionError("open-loop policy evaluated at step " + std::to_string(step) +
                           " beyond horizon " + std::to_string(spec_.horizon));
    }
    for (std::size_t j = 0; j < u.size(); ++j) {
      u[j] = params_(static_cast<Eigen::Index>(step * spec_.control_dim + j));
    }
    return;
  }
  if (feature_count(rho.rows()) != spec_.n_features) {
    throw DimensionError("Policy: state dimension does not match feature count");
  }
  thread_local std::vector<double> features;
  features.resize(spec_.n_features);
  featurize_into(spec_.feature_map, rho, features);
  forward(layer_sizes_, params_.data(), features, u);
}

}  // namespace qfb
