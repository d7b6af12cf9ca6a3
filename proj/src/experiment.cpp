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

#include "qfb/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace qfb {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, mode);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json arm_json(const ArmReport& arm) {
  return {{"final_fidelity_mean", arm.final_fidelity_mean},
          {"final_fidelity_1sigma", arm.final_fidelity_sd},
          {"J_state_mean", arm.jstate_mean},
          {"J_state_1sigma", arm.jstate_sd},
          {"J_control_mean", arm.jcontrol_mean},
          {"J_control_1sigma", arm.jcontrol_sd},
          {"control_effort_mean", arm.curves.effort_mean},
          {"time_to_fidelity_0.9", number_or_null(arm.time_to_fidelity)},
          {"n_trajectories", arm.curves.n_trajectories}};
}

void write_basis_csv(const fs::path& path, const EnsembleCurves& c, const std::vector<std::string>& labels) {
  auto out = open_output(path);
  out << "time";
  for (const auto& l : labels) out << ',' << l << "_mean," << l << "_2sigma";
  out << '\n';
  for (std::size_t i = 0; i < c.time.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out << format_number(c.time[i]);
    for (Eigen::Index f = 0; f < c.feature_mean.cols(); ++f) {
      out << ',' << format_number(c.feature_mean(row, f)) << ',' << format_number(2.0 * c.feature_sd(row, f));
    }
    out << '\n';
  }
}

void write_cost_csv(const fs::path& path, const std::vector<const ArmReport*>& arms) {
  auto out = open_output(path);
  out << "time";
  for (const ArmReport* a : arms) {
    out << ',' << a->name << "_Jstate_mean," << a->name << "_Jstate_1sigma," << a->name
        << "_Jcontrol_mean," << a->name << "_Jcontrol_1sigma";
  }
  out << '\n';
  const EnsembleCurves& first = arms.front()->curves;
  for (std::size_t i = 0; i < first.time.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out << format_number(first.time[i]);
    for (const ArmReport* a : arms) {
      const EnsembleCurves& c = a->curves;
      out << ',' << format_number(c.jstate_mean(row)) << ',' << format_number(c.jstate_sd(row)) << ','
          << format_number(c.jcontrol_mean(row)) << ',' << format_number(c.jcontrol_sd(row));
    }
    out << '\n';
  }
}

void write_fidelity_csv(const fs::path& path, const EnsembleCurves& c) {
  auto out = open_output(path);
  out << "time,fidelity_mean,fidelity_1sigma\n";
  for (std::size_t i = 0; i < c.time.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out << format_number(c.time[i]) << ',' << format_number(c.fidelity_mean(row)) << ','
        << format_number(c.fidelity_sd(row)) << '\n';
  }
}

const char* kStatsHeader =
    "iteration,mean_cost,best_cost,ess,update_norm,step_size,underflowed,mu_norm,test_fidelity";

std::string stats_row(const IterationStats& s, double mu_norm, std::optional<double> test_fidelity) {
  std::string row = fmt::format("{},{},{},{},{},{},{},{},", s.iteration, format_number(s.mean_cost),
                                format_number(s.best_cost), format_number(s.ess),
                                format_number(s.update_norm), format_number(s.step_size), s.underflowed,
                                format_number(mu_norm));
  if (test_fidelity) row += format_number(*test_fidelity);
  return row;
}

/// Rewrites `path` keeping the header and rows with iteration < `limit`.
void truncate_stats(const fs::path& path, std::size_t limit) {
  std::vector<std::string> kept;
  {
    std::ifstream in(path);
    if (!in) throw FormatError("resume: missing '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kStatsHeader) throw FormatError("resume: unexpected stats header");
    while (std::getline(in, line)) {
      const std::size_t it = std::stoul(line.substr(0, line.find(',')));
      if (it < limit) kept.push_back(line);
    }
  }
  if (kept.size() != limit) throw FormatError("resume: stats CSV is missing rows before the checkpoint");
  auto out = open_output(path);
  out << kStatsHeader << '\n';
  for (const auto& l : kept) out << l << '\n';
}

Checkpoint checkpoint_for(const ExperimentConfig& cfg, const fs::path& dir) {
  const Checkpoint ckpt = load_checkpoint(dir);
  const QndSystem sys = build_system(cfg);
  const PolicySpec spec = build_policy_spec(cfg, sys);
  if (!(ckpt.spec == spec)) {
    throw ConfigError("checkpoint in '" + dir.string() + "' does not match the configured policy");
  }
  return ckpt;
}

fs::path checkpoint_dir(const ExperimentConfig& cfg, const EvalOptions& options) {
  return options.checkpoint.value_or(fs::path(cfg.output_dir) / "checkpoint");
}

}  // namespace

std::string format_number(double value) { return fmt::format("{}", value); }

ArmReport summarize_arm(std::string name, EnsembleCurves curves, double fidelity_threshold) {
  ArmReport arm;
  arm.name = std::move(name);
  const Eigen::Index last = curves.fidelity_mean.size() - 1;
  arm.final_fidelity_mean = curves.fidelity_mean(last);
  arm.final_fidelity_sd = curves.fidelity_sd(last);
  arm.jstate_mean = curves.jstate_mean(last);
  arm.jstate_sd = curves.jstate_sd(last);
  arm.jcontrol_mean = curves.jcontrol_mean(last);
  arm.jcontrol_sd = curves.jcontrol_sd(last);
  for (Eigen::Index i = 0; i <= last; ++i) {
    if (curves.fidelity_mean(i) >= fidelity_threshold) {
      arm.time_to_fidelity = curves.time[static_cast<std::size_t>(i)];
      break;
    }
  }
  arm.curves = std::move(curves);
  return arm;
}

BatchProblem evaluation_problem(const QndSystem& sys, const CostSpec& cost, const SimConfig& sim,
                                std::uint64_t master_seed, const InitialStateSource& initial,
                                std::uint64_t block) {
  BatchProblem p;
  p.system = &sys;
  p.cost = &cost;
  p.sim = sim;
  p.seed = SeedSpec(master_seed);
  p.iteration = block;
  p.initial = initial;
  p.noise_domain = StreamDomain::eval_wiener;
  p.initial_domain = StreamDomain::eval_initial_state;
  return p;
}

TrainOutcome run_train(const ExperimentConfig& cfg, bool resume, std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  const QndSystem sys = build_system(cfg);
  const CostSpec cost = build_cost(cfg, sys);
  const PolicySpec spec = build_policy_spec(cfg, sys);
  const GassConfig gass = build_gass(cfg);
  const SimConfig sim = build_sim(cfg, cfg.sim.n_steps);
  const InitialStateSource initial = build_initial(cfg, sys);

  TrainOutcome outcome;
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  outcome.stats_csv = out_dir / "train_stats.csv";
  outcome.checkpoint_dir = out_dir / "checkpoint";

  SamplingDistribution dist;
  std::size_t start = 0;
  if (resume && fs::exists(outcome.checkpoint_dir / "checkpoint.json")) {
    const Checkpoint ckpt = checkpoint_for(cfg, outcome.checkpoint_dir);
    if (ckpt.master_seed != cfg.gass.master_seed) {
      throw ConfigError("resume: checkpoint was written with a different master_seed");
    }
    dist = ckpt.distribution;
    start = ckpt.next_iteration;
    truncate_stats(outcome.stats_csv, start);
    if (log) *log << "resuming at iteration " << start << '\n';
  } else {
    dist.mu = init_params(spec, gass.seed.stream(StreamDomain::policy_init, {}).key());
    dist.sigma = RealVector::Constant(dist.mu.size(), cfg.gass.sigma);
    auto out = open_output(outcome.stats_csv);
    out << kStatsHeader << '\n';
  }

  std::ofstream csv = open_output(outcome.stats_csv, std::ios::app);
  const BatchProblem test_problem = evaluation_problem(sys, cost, sim, cfg.gass.master_seed, initial, 1);

  Checkpoint ckpt{spec, dist, start, cfg.gass.master_seed};
  auto on_iteration = [&](const IterationStats& s, const SamplingDistribution& d) {
    std::optional<double> test_fidelity;
    const bool last = s.iteration + 1 == gass.iterations;
    if (cfg.gass.test_every > 0 && (s.iteration % cfg.gass.test_every == 0 || last)) {
      const Policy policy(spec, d.mu);
      const EnsembleCurves c = ensemble_statistics(test_problem, policy, spec.feature_map,
                                                   cfg.gass.test_trajectories, sim.n_steps);
      test_fidelity = c.fidelity_mean(c.fidelity_mean.size() - 1);
    }
    csv << stats_row(s, d.mu.norm(), test_fidelity) << '\n';
    csv.flush();
    if (log) {
      *log << fmt::format("iter {:>5}  mean {:.5f}  best {:.5f}  ess {:7.2f}  |dmu| {:.4g}", s.iteration,
                          s.mean_cost, s.best_cost, s.ess, s.update_norm);
      if (test_fidelity) *log << fmt::format("  test_fid {:.4f}", *test_fidelity);
      *log << fmt::format("  ({:.2f}s)\n", s.wall_seconds);
      if (s.underflowed > 0) {
        *log << "  warning: " << s.underflowed << " candidate weights underflowed to zero\n";
      }
      if (s.ess < 2.0) *log << "  warning: effective sample size collapsed below 2\n";
    }
    ckpt.distribution.mu = d.mu;
    ckpt.next_iteration = s.iteration + 1;
    if (cfg.gass.checkpoint_every > 0 && ckpt.next_iteration % cfg.gass.checkpoint_every == 0) {
      save_checkpoint(outcome.checkpoint_dir, ckpt);
    }
  };

  PolicyObjective objective(sys, spec, cost, sim, gass.seed, initial, gass.rollouts);
  OptimizeResult result = optimize(dist, gass, objective, start, on_iteration);
  ckpt.distribution = result.distribution;
  ckpt.next_iteration = result.next_iteration;
  save_checkpoint(outcome.checkpoint_dir, ckpt);

  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double iter_seconds = 0.0;
  for (const auto& s : result.stats) iter_seconds += s.wall_seconds;
  write_json(out_dir / "train_timing.json",
             {{"iterations_run", result.stats.size()},
              {"wall_seconds_total", outcome.wall_seconds},
              {"wall_seconds_per_iteration",
               result.stats.empty() ? 0.0 : iter_seconds / static_cast<double>(result.stats.size())},
              {"threads", worker_threads()}});
  outcome.stats = std::move(result.stats);
  outcome.checkpoint = std::move(ckpt);
  return outcome;
}

ArmReport run_eval(const ExperimentConfig& cfg, const EvalOptions& options, std::ostream* log) {
  const QndSystem sys = build_system(cfg);
  const CostSpec cost = build_cost(cfg, sys);
  const PolicySpec spec = build_policy_spec(cfg, sys);
  const std::size_t horizon = options.horizon.value_or(cfg.sim.eval_steps > 0 ? cfg.sim.eval_steps : cfg.sim.n_steps);
  const std::size_t n_traj = options.n_trajectories.value_or(cfg.sim.n_eval_trajectories);
  if (horizon == 0) throw ConfigError("eval: horizon must be >= 1");
  if (n_traj < 2) throw ConfigError("eval: need at least 2 trajectories");
  const SimConfig sim = build_sim(cfg, horizon);
  const BatchProblem problem = evaluation_problem(sys, cost, sim, cfg.gass.master_seed, build_initial(cfg, sys));

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Policy> policy;
  std::optional<BaselineController> baseline;
  const Controller* ctrl = nullptr;
  std::string arm_name = "policy";
  if (options.baseline) {
    baseline.emplace(build_baseline(cfg, sys), sys, cost.target);
    ctrl = &*baseline;
    arm_name = "baseline";
  } else {
    if (spec.kind == PolicyKind::open_loop && horizon > spec.horizon) {
      throw ConfigError("eval: open-loop policies cannot run past their training horizon");
    }
    policy.emplace(spec, checkpoint_for(cfg, checkpoint_dir(cfg, options)).distribution.mu);
    ctrl = &*policy;
  }
  ArmReport arm = summarize_arm(
      arm_name, ensemble_statistics(problem, *ctrl, spec.feature_map, n_traj, cfg.sim.record_stride));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  const auto labels = feature_labels(spec.feature_map, sys.dim());
  write_basis_csv(out_dir / "eval_basis.csv", arm.curves, labels);
  write_cost_csv(out_dir / "eval_costs.csv", {&arm});
  write_fidelity_csv(out_dir / "eval_fidelity.csv", arm.curves);
  json summary = arm_json(arm);
  summary["controller"] = arm_name;
  summary["n_steps"] = horizon;
  summary["dt"] = sim.dt;
  write_json(out_dir / "eval_summary.json", summary);
  if (log) {
    *log << fmt::format("eval {}: {} trajectories x {} steps, final fidelity {:.4f} +- {:.4f}, "
                        "J_state {:.4f}, J_control {:.5f} ({:.1f}s)\n",
                        arm_name, n_traj, horizon, arm.final_fidelity_mean, arm.final_fidelity_sd,
                        arm.jstate_mean, arm.jcontrol_mean, seconds);
  }
  return arm;
}

CompareReport compare_controllers(const BatchProblem& problem, const Controller& trained,
                                  const Controller& baseline, FeatureMap features,
                                  std::size_t n_trajectories, std::size_t stride) {
  CompareReport report;
  report.trained = summarize_arm("trained", ensemble_statistics(problem, trained, features, n_trajectories, stride));
  report.baseline =
      summarize_arm("baseline", ensemble_statistics(problem, baseline, features, n_trajectories, stride));
  report.effort_ratio = report.baseline.jcontrol_mean / report.trained.jcontrol_mean;

  json trained_json = arm_json(report.trained);
  json base = arm_json(report.baseline);
  const bool finite_ratio = std::isfinite(report.effort_ratio);
  trained_json["effort_ratio"] = 1.0;
  base["effort_ratio"] = finite_ratio ? json(report.effort_ratio) : json(nullptr);
  const bool separated = report.trained.jstate_mean + report.trained.jstate_sd <
                         report.baseline.jstate_mean - report.baseline.jstate_sd;
  report.json = {{"trained", trained_json},
                 {"baseline", base},
                 {"effort_ratio", finite_ratio ? json(report.effort_ratio) : json(nullptr)},
                 {"J_state_bands_separated", separated},
                 {"n_trajectories", n_trajectories},
                 {"n_steps", problem.sim.n_steps},
                 {"dt", problem.sim.dt}};
  return report;
}

CompareReport run_compare(const ExperimentConfig& cfg, const EvalOptions& options,
                          const BaselineSpec& baseline_spec, std::ostream* log) {
  const QndSystem sys = build_system(cfg);
  const CostSpec cost = build_cost(cfg, sys);
  const PolicySpec spec = build_policy_spec(cfg, sys);
  const std::size_t horizon = options.horizon.value_or(cfg.sim.n_steps);
  const std::size_t n_traj = options.n_trajectories.value_or(cfg.sim.n_eval_trajectories);
  if (n_traj < 2) throw ConfigError("compare: need at least 2 trajectories");
  const SimConfig sim = build_sim(cfg, horizon);
  const BatchProblem problem = evaluation_problem(sys, cost, sim, cfg.gass.master_seed, build_initial(cfg, sys));

  const Policy policy(spec, checkpoint_for(cfg, checkpoint_dir(cfg, options)).distribution.mu);
  const BaselineController baseline(baseline_spec, sys, cost.target);

  CompareReport report =
      compare_controllers(problem, policy, baseline, spec.feature_map, n_traj, cfg.sim.record_stride);
  report.json["baseline"]["gain_fidelity"] = baseline_spec.gain_fidelity;
  report.json["baseline"]["gain_gradient"] = baseline_spec.gain_gradient;

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  write_json(out_dir / "compare.json", report.json);
  write_cost_csv(out_dir / "compare_costs.csv", {&report.trained, &report.baseline});
  const auto labels = feature_labels(spec.feature_map, sys.dim());
  write_basis_csv(out_dir / "compare_basis_trained.csv", report.trained.curves, labels);
  write_basis_csv(out_dir / "compare_basis_baseline.csv", report.baseline.curves, labels);
  if (log) {
    *log << fmt::format("compare: fidelity {:.4f} vs {:.4f}, J_state {:.4f} vs {:.4f}, "
                        "J_control {:.5f} vs {:.5f}, effort ratio {:.3g}\n",
                        report.trained.final_fidelity_mean, report.baseline.final_fidelity_mean,
                        report.trained.jstate_mean, report.baseline.jstate_mean,
                        report.trained.jcontrol_mean, report.baseline.jcontrol_mean, report.effort_ratio);
  }
  return report;
}

nlohmann::json run_degeneracy(const ExperimentConfig& cfg) {
  const QndSystem sys = build_system(cfg);
  const Eigen::Index dim = sys.dim();
  std::vector<std::pair<std::string, DensityState>> states;
  states.emplace_back("target", build_target(cfg, sys));
  states.emplace_back("maximally_mixed", DensityState::maximally_mixed(dim));
  for (Eigen::Index k = 0; k < dim; ++k) {
    states.emplace_back("basis:" + std::to_string(k), DensityState::basis_projector(dim, k));
  }
  if (sys.n_qubits() == 0) {
    ComplexVector ket = ComplexVector::Zero(dim);
    ket(0) = ket(1) = 1.0 / std::sqrt(2.0);
    states.emplace_back("superposition_01", DensityState::pure(ket));
  }

  const bool hermitian = is_hermitian(sys.v());
  const ComplexMatrix spectral_op = hermitian ? sys.v() : ComplexMatrix((sys.v() + sys.v_adjoint()) / 2.0);
  const RealVector eig = hermitian_eigenvalues(spectral_op);
  json entries = json::array();
  for (const auto& [name, rho] : states) {
    const double norm = diffusion(sys, rho).norm();
    entries.push_back({{"state", name}, {"diffusion_norm", norm}, {"is_degenerate", norm < tol::kDegenerate}});
  }
  json doc = {{"system", sys.name()},
              {"operator_hermitian", hermitian},
              {"eigenvalues_of", hermitian ? "V" : "(V + V^+)/2"},
              {"operator_eigenvalues", std::vector<double>(eig.data(), eig.data() + eig.size())},
              {"degeneracy_tolerance", tol::kDegenerate},
              {"states", entries}};
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  write_json(out_dir / "degeneracy.json", doc);
  return doc;
}

}  // namespace qfb
