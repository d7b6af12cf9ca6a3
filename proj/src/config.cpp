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

#include "qfb/config.hpp"

#include <fstream>
#include <set>

namespace qfb {
namespace {

using nlohmann::json;

/// Reads typed keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.is_null()) return;
    if (!doc.is_object()) throw ConfigError("'" + name_ + "' must be an object");
    obj_ = &doc;
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    try {
      out = obj_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("bad value for '" + path(key) + "': " + obj_->at(key).dump());
    }
  }

  /// Scalar or list of numbers.
  void read_list(const char* key, std::vector<double>& out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    const json& v = obj_->at(key);
    try {
      if (v.is_number()) {
        out = {v.get<double>()};
      } else {
        out = v.get<std::vector<double>>();
      }
    } catch (const json::exception&) {
      throw ConfigError("bad value for '" + path(key) + "': " + v.dump());
    }
  }

  template <typename Parse, typename T>
  void read_enum(const char* key, T& out, Parse parse) {
    std::optional<std::string> text;
    read(key, text);
    if (!text) return;
    try {
      out = parse(*text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("bad value for '" + path(key) + "': " + e.what());
    }
  }

  void finish() const {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + path(key) + "'");
    }
  }

  std::string path(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

const json& child(const json& doc, const char* key) {
  static const json null_value;
  return doc.contains(key) ? doc.at(key) : null_value;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<double> broadcast(const std::vector<double>& values, std::size_t n, const std::string& key) {
  if (values.size() == 1) return std::vector<double>(n, values.front());
  if (values.size() != n) {
    throw ConfigError("'" + key + "' needs 1 or " + std::to_string(n) + " entries, got " +
                      std::to_string(values.size()));
  }
  return values;
}

/// "basis:<k>" -> k, else nullopt.
std::optional<Eigen::Index> basis_index(const std::string& name) {
  const std::string prefix = "basis:";
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  try {
    std::size_t used = 0;
    const long k = std::stol(name.substr(prefix.size()), &used);
    if (used + prefix.size() != name.size() || k < 0) throw ConfigError("bad basis index in '" + name + "'");
    return static_cast<Eigen::Index>(k);
  } catch (const std::logic_error&) {
    throw ConfigError("bad basis index in '" + name + "'");
  }
}

DensityState named_state(const std::string& name, const QndSystem& sys, const std::string& key) {
  if (name == "bell_psi_plus") {
    require(sys.dim() == 4, "'" + key + "': bell_psi_plus needs a two-qubit system");
    return bell_psi_plus();
  }
  if (name == "maximally_mixed") return DensityState::maximally_mixed(sys.dim());
  if (auto k = basis_index(name)) {
    require(*k < sys.dim(), "'" + key + "': basis index out of range");
    return DensityState::basis_projector(sys.dim(), *k);
  }
  throw ConfigError("'" + key + "': unknown state '" + name + "'");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  ExperimentConfig cfg;
  Section root(doc, "");
  json ignored;
  for (const char* key : {"system", "policy", "cost", "gass", "sim", "baseline"}) root.read(key, ignored);
  root.read("output_dir", cfg.output_dir);
  root.finish();

  Section sys(child(doc, "system"), "system");
  sys.read("kind", cfg.system.kind);
  sys.read("eta", cfg.system.eta);
  sys.read("gamma", cfg.system.gamma);
  sys.read("n_levels", cfg.system.n_levels);
  sys.read("omega", cfg.system.omega);
  sys.read("controls", cfg.system.controls);
  sys.finish();
  require(cfg.system.kind == "two_qubit" || cfg.system.kind == "homodyne",
          "system.kind must be 'two_qubit' or 'homodyne'");
  require(cfg.system.eta > 0.0 && cfg.system.eta <= 1.0, "system.eta must lie in (0, 1]");
  require(cfg.system.gamma >= 0.0, "system.gamma must be nonnegative");
  require(cfg.system.n_levels >= 2, "system.n_levels must be >= 2");
  require(!cfg.system.controls.empty(), "system.controls must not be empty");
  for (const auto& c : cfg.system.controls) {
    require(c == "x" || c == "p", "system.controls entries must be 'x' or 'p'");
  }

  Section pol(child(doc, "policy"), "policy");
  pol.read_enum("kind", cfg.policy.kind, parse_policy_kind);
  std::optional<std::string> map;
  pol.read("feature_map", map);
  if (map) {
    try {
      cfg.policy.feature_map = parse_feature_map(*map);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("bad value for 'policy.feature_map': ") + e.what());
    }
  }
  pol.read("hidden_widths", cfg.policy.hidden_widths);
  pol.finish();

  Section cost(child(doc, "cost"), "cost");
  cost.read("target", cfg.cost.target);
  cost.read("state_weight", cfg.cost.state_weight);
  cost.read_list("control_weights", cfg.cost.control_weights);
  cost.read("q_alpha", cfg.cost.q_alpha);
  cost.read("q_beta", cfg.cost.q_beta);
  cost.read("terminal_weight", cfg.cost.terminal_weight);
  cost.finish();

  Section gass(child(doc, "gass"), "gass");
  gass.read("iterations", cfg.gass.iterations);
  gass.read("param_samples", cfg.gass.param_samples);
  gass.read("rollouts", cfg.gass.rollouts);
  gass.read("step_size", cfg.gass.step_size);
  gass.read("step_decay", cfg.gass.step_decay);
  gass.read("kappa", cfg.gass.kappa);
  gass.read("sigma", cfg.gass.sigma);
  gass.read("sigma_decay", cfg.gass.sigma_decay);
  gass.read_enum("sampling", cfg.gass.sampling, parse_sampling_scheme);
  gass.read("master_seed", cfg.gass.master_seed);
  gass.read("checkpoint_every", cfg.gass.checkpoint_every);
  gass.read("test_every", cfg.gass.test_every);
  gass.read("test_trajectories", cfg.gass.test_trajectories);
  gass.finish();
  require(cfg.gass.param_samples >= 1, "gass.param_samples must be >= 1");
  require(cfg.gass.rollouts >= 1, "gass.rollouts must be >= 1");
  require(cfg.gass.step_size > 0.0, "gass.step_size must be positive");
  require(cfg.gass.step_decay > 0.0, "gass.step_decay must be positive");
  require(cfg.gass.kappa > 0.0, "gass.kappa must be positive");
  require(cfg.gass.sigma > 0.0, "gass.sigma must be positive");
  require(cfg.gass.sigma_decay > 0.0, "gass.sigma_decay must be positive");
  require(cfg.gass.test_every == 0 || cfg.gass.test_trajectories >= 2,
          "gass.test_trajectories must be >= 2");

  Section sim(child(doc, "sim"), "sim");
  sim.read("dt", cfg.sim.dt);
  sim.read("n_steps", cfg.sim.n_steps);
  sim.read("eval_steps", cfg.sim.eval_steps);
  sim.read("n_eval_trajectories", cfg.sim.n_eval_trajectories);
  sim.read("record_stride", cfg.sim.record_stride);
  sim.read("renormalize", cfg.sim.renormalize);
  sim.read("psd_projection", cfg.sim.psd_projection);
  sim.read("initial_state", cfg.sim.initial_state);
  sim.finish();
  require(cfg.sim.dt > 0.0, "sim.dt must be positive");
  require(cfg.sim.n_steps >= 1, "sim.n_steps must be >= 1");
  require(cfg.sim.n_eval_trajectories >= 2, "sim.n_eval_trajectories must be >= 2");
  require(cfg.sim.record_stride >= 1, "sim.record_stride must be >= 1");

  Section base(child(doc, "baseline"), "baseline");
  base.read_list("gain_fidelity", cfg.baseline.gain_fidelity);
  base.read_list("gain_gradient", cfg.baseline.gain_gradient);
  base.finish();

  // Cross-section checks need the system.
  const QndSystem system = build_system(cfg);
  build_cost(cfg, system);
  build_policy_spec(cfg, system);
  build_baseline(cfg, system);
  build_initial(cfg, system);
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  json policy_json = {{"kind", to_string(policy.kind)}, {"hidden_widths", policy.hidden_widths}};
  if (policy.feature_map) policy_json["feature_map"] = to_string(*policy.feature_map);
  return {{"system",
           {{"kind", system.kind},
            {"eta", system.eta},
            {"gamma", system.gamma},
            {"n_levels", system.n_levels},
            {"omega", system.omega},
            {"controls", system.controls}}},
          {"policy", policy_json},
          {"cost",
           {{"target", cost.target},
            {"state_weight", cost.state_weight},
            {"control_weights", cost.control_weights},
            {"q_alpha", cost.q_alpha},
            {"q_beta", cost.q_beta},
            {"terminal_weight", cost.terminal_weight}}},
          {"gass",
           {{"iterations", gass.iterations},
            {"param_samples", gass.param_samples},
            {"rollouts", gass.rollouts},
            {"step_size", gass.step_size},
            {"step_decay", gass.step_decay},
            {"kappa", gass.kappa},
            {"sigma", gass.sigma},
            {"sigma_decay", gass.sigma_decay},
            {"sampling", to_string(gass.sampling)},
            {"master_seed", gass.master_seed},
            {"checkpoint_every", gass.checkpoint_every},
            {"test_every", gass.test_every},
            {"test_trajectories", gass.test_trajectories}}},
          {"sim",
           {{"dt", sim.dt},
            {"n_steps", sim.n_steps},
            {"eval_steps", sim.eval_steps},
            {"n_eval_trajectories", sim.n_eval_trajectories},
            {"record_stride", sim.record_stride},
            {"renormalize", sim.renormalize},
            {"psd_projection", sim.psd_projection},
            {"initial_state", sim.initial_state}}},
          {"baseline", {{"gain_fidelity", baseline.gain_fidelity}, {"gain_gradient", baseline.gain_gradient}}},
          {"output_dir", output_dir}};
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override '" + key + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

QndSystem build_system(const ExperimentConfig& cfg) {
  const SystemSection& s = cfg.system;
  try {
    if (s.kind == "two_qubit") return two_qubit_system(s.eta, s.gamma);
    const auto n = static_cast<Eigen::Index>(s.n_levels);
    const ComplexMatrix a = annihilation(n);
    std::vector<ComplexMatrix> hams;
    for (const auto& c : s.controls) {
      if (c == "x") {
        hams.push_back(a + a.adjoint());
      } else {
        hams.push_back(Complex(0.0, 1.0) * (a.adjoint() - a));
      }
    }
    return homodyne_system(n, s.eta, s.gamma, oscillator_hamiltonian(n, s.omega), hams);
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("invalid system section: ") + e.what());
  }
}

DensityState build_target(const ExperimentConfig& cfg, const QndSystem& sys) {
  std::string name = cfg.cost.target;
  if (name.empty()) name = cfg.system.kind == "two_qubit" ? "bell_psi_plus" : "basis:0";
  return named_state(name, sys, "cost.target");
}

CostSpec build_cost(const ExperimentConfig& cfg, const QndSystem& sys) {
  CostSpec spec;
  spec.target = build_target(cfg, sys);
  spec.state_weight = cfg.cost.state_weight;
  spec.control_weights = broadcast(cfg.cost.control_weights, sys.control_dim(), "cost.control_weights");
  spec.q_alpha = cfg.cost.q_alpha;
  spec.q_beta = cfg.cost.q_beta;
  spec.terminal_weight = cfg.cost.terminal_weight;
  try {
    spec.validate(sys.control_dim());
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("invalid cost section: ") + e.what());
  }
  return spec;
}

PolicySpec build_policy_spec(const ExperimentConfig& cfg, const QndSystem& sys) {
  const FeatureMap map =
      cfg.policy.feature_map.value_or(sys.n_qubits() > 0 ? FeatureMap::pauli : FeatureMap::raw_entries);
  if (map == FeatureMap::pauli && sys.n_qubits() == 0) {
    throw ConfigError("policy.feature_map 'pauli' needs a qubit system");
  }
  try {
    switch (cfg.policy.kind) {
      case PolicyKind::linear:
        require(cfg.policy.hidden_widths.empty(), "policy.hidden_widths is only valid for mlp policies");
        return linear_policy_spec(map, sys.dim(), sys.control_dim());
      case PolicyKind::mlp:
        return mlp_policy_spec(map, sys.dim(), sys.control_dim(), cfg.policy.hidden_widths);
      case PolicyKind::open_loop:
        return open_loop_policy_spec(sys.control_dim(), cfg.sim.n_steps);
    }
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("invalid policy section: ") + e.what());
  }
  throw ConfigError("unknown policy kind");
}

GassConfig build_gass(const ExperimentConfig& cfg) {
  GassConfig g;
  g.iterations = cfg.gass.iterations;
  g.param_samples = cfg.gass.param_samples;
  g.rollouts = cfg.gass.rollouts;
  g.step_size = cfg.gass.step_size;
  g.step_decay = cfg.gass.step_decay;
  g.shape.kappa = cfg.gass.kappa;
  g.sigma_decay = cfg.gass.sigma_decay;
  g.sampling = cfg.gass.sampling;
  g.seed = SeedSpec(cfg.gass.master_seed);
  return g;
}

SimConfig build_sim(const ExperimentConfig& cfg, std::size_t n_steps) {
  SimConfig s;
  s.dt = cfg.sim.dt;
  s.n_steps = n_steps;
  s.renormalize = cfg.sim.renormalize;
  s.psd_projection = cfg.sim.psd_projection;
  return s;
}

BaselineSpec build_baseline(const ExperimentConfig& cfg, const QndSystem& sys) {
  const std::size_t m = sys.control_dim();
  return BaselineSpec{broadcast(cfg.baseline.gain_fidelity, m, "baseline.gain_fidelity"),
                      broadcast(cfg.baseline.gain_gradient, m, "baseline.gain_gradient")};
}

InitialStateSource build_initial(const ExperimentConfig& cfg, const QndSystem& sys) {
  const std::string& name = cfg.sim.initial_state;
  if (name == "random_pure") return InitialStateSource::random_pure(sys.dim());
  if (name == "target") return InitialStateSource::fixed(build_target(cfg, sys));
  return InitialStateSource::fixed(named_state(name, sys, "sim.initial_state"));
}

}  // namespace qfb
