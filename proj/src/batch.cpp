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

#include "qfb/batch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>

#include <omp.h>

namespace qfb {

InitialStateSource InitialStateSource::fixed(DensityState state) {
  InitialStateSource s;
  s.dim_ = state.dim();
  s.fixed_ = std::move(state);
  return s;
}

InitialStateSource InitialStateSource::random_pure(Eigen::Index dim) {
  InitialStateSource s;
  s.dim_ = dim;
  return s;
}

DensityState InitialStateSource::state(const SeedSpec& seed, StreamDomain domain,
                                       std::uint64_t iteration, std::uint64_t rollout) const {
  if (fixed_) return *fixed_;
  return random_pure_state(dim_, seed.stream(domain, {iteration, 0, rollout}).key());
}

NoiseStream rollout_noise(const BatchProblem& problem, std::uint64_t rollout) {
  return NoiseStream(problem.seed.stream(problem.noise_domain, {problem.iteration, 0, rollout}),
                     problem.sim.dt);
}

int worker_threads() {
  if (const char* env = std::getenv("QFB_NUM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return omp_get_max_threads();
}

namespace {

void check_problem(const BatchProblem& problem, const std::vector<const Controller*>& controllers,
                   std::size_t rollouts) {
  if (problem.system == nullptr || problem.cost == nullptr) {
    throw DimensionError("BatchProblem: system and cost must be set");
  }
  if (rollouts == 0) throw DimensionError("batch: number of rollouts must be >= 1");
  problem.sim.validate();
  problem.cost->validate(problem.system->control_dim());
  for (const Controller* c : controllers) {
    if (c == nullptr) throw DimensionError("batch: null controller");
    if (c->control_dim() != problem.system->control_dim()) {
      throw DimensionError("batch: controller/system control dimension mismatch");
    }
  }
}

std::vector<ComplexMatrix> initial_states(const BatchProblem& problem, std::size_t rollouts) {
  std::vector<ComplexMatrix> out;
  out.reserve(rollouts);
  for (std::size_t r = 0; r < rollouts; ++r) {
    out.push_back(
        problem.initial.state(problem.seed, problem.initial_domain, problem.iteration, r).matrix());
  }
  return out;
}

// Runs body(task, workspace) for every task index; exceptions thrown inside
// the parallel region are captured and rethrown on the calling thread.
template <class Body>
void parallel_tasks(std::size_t n_tasks, Eigen::Index dim, Body&& body) {
  std::exception_ptr failure;
#pragma omp parallel num_threads(worker_threads())
  {
    StepWorkspace ws(dim);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t task = 0; task < static_cast<std::int64_t>(n_tasks); ++task) {
      try {
        body(static_cast<std::size_t>(task), ws);
      } catch (...) {
#pragma omp critical(qfb_batch_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// Per-chunk running sums. Row i holds the time point i; the column blocks
// are features, fidelity, J_state, J_control, each followed by the same
// block of squares.
class ChunkSums {
 public:
  ChunkSums(std::size_t n_points, std::size_t n_features)
      : n_features_(n_features),
        width_(n_features + 3),
        sums_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_points),
                                    static_cast<Eigen::Index>(2 * (n_features + 3)))) {}

  void add(std::size_t point, std::span<const double> features, double fid, double js, double jc) {
    const auto i = static_cast<Eigen::Index>(point);
    for (std::size_t f = 0; f < n_features_; ++f) accumulate(i, f, features[f]);
    accumulate(i, n_features_, fid);
    accumulate(i, n_features_ + 1, js);
    accumulate(i, n_features_ + 2, jc);
  }
  void merge(const ChunkSums& other) {
    sums_ += other.sums_;
    effort_ += other.effort_;
  }

  Eigen::MatrixXd& sums() { return sums_; }
  const Eigen::MatrixXd& sums() const { return sums_; }
  double effort_ = 0.0;

 private:
  void accumulate(Eigen::Index i, std::size_t col, double v) {
    sums_(i, static_cast<Eigen::Index>(col)) += v;
    sums_(i, static_cast<Eigen::Index>(col + width_)) += v * v;
  }

  std::size_t n_features_;
  std::size_t width_;
  Eigen::MatrixXd sums_;
};

class StatsObserver final : public StepObserver {
 public:
  StatsObserver(ChunkSums& sums, const CostSpec& cost, FeatureMap map, Eigen::Index dim,
                std::size_t stride, double dt)
      : sums_(sums), cost_(cost), map_(map), stride_(stride), dt_(dt),
        features_(static_cast<std::size_t>(dim * dim)) {}

  void on_step(std::size_t step, const ComplexMatrix& rho, std::span<const double> u, double,
               double, const RunningCostParts& parts) override {
    if (step % stride_ == 0) record(rho);
    js_ += parts.state;
    jc_ += parts.control;
    for (double v : u) effort_ += v * v * dt_;
  }
  void on_final(const ComplexMatrix& rho) override {
    record(rho);
    sums_.effort_ += effort_;
  }

 private:
  void record(const ComplexMatrix& rho) {
    featurize_into(map_, rho, features_);
    sums_.add(point_++, features_, fidelity_overlap(cost_.target.matrix(), rho), js_, jc_);
  }

  ChunkSums& sums_;
  const CostSpec& cost_;
  FeatureMap map_;
  std::size_t stride_;
  double dt_;
  std::vector<double> features_;
  std::size_t point_ = 0;
  double js_ = 0.0;
  double jc_ = 0.0;
  double effort_ = 0.0;
};

std::size_t n_points(std::size_t n_steps, std::size_t stride) {
  // Multiples of stride strictly below n_steps, then the final time.
  return (n_steps + stride - 1) / stride + 1;
}

void check_stats(const BatchProblem& problem, const Controller& controller, std::size_t n_traj,
                 std::size_t stride) {
  check_problem(problem, {&controller}, n_traj);
  if (n_traj < 2) throw DimensionError("ensemble_statistics: need at least 2 trajectories");
  if (stride == 0) throw DimensionError("ensemble_statistics: stride must be >= 1");
}

void run_chunk(const BatchProblem& problem, const Controller& controller, FeatureMap map,
               std::size_t chunk, std::size_t n_traj, std::size_t stride, ChunkSums& sums,
               StepWorkspace& ws) {
  const std::size_t begin = chunk * kStatsChunk;
  const std::size_t end = std::min(begin + kStatsChunk, n_traj);
  const QndSystem& sys = *problem.system;
  for (std::size_t r = begin; r < end; ++r) {
    const DensityState rho0 =
        problem.initial.state(problem.seed, problem.initial_domain, problem.iteration, r);
    StatsObserver obs(sums, *problem.cost, map, sys.dim(), stride, problem.sim.dt);
    simulate(sys, controller, rho0.matrix(), *problem.cost, problem.sim, rollout_noise(problem, r),
             obs, ws);
  }
}

EnsembleCurves finalize(const ChunkSums& total, std::size_t n_features, std::size_t n_traj,
                        std::size_t n_steps, std::size_t stride, double dt) {
  const std::size_t width = n_features + 3;
  const auto n = static_cast<double>(n_traj);
  const Eigen::MatrixXd& s = total.sums();
  const Eigen::Index rows = s.rows();
  Eigen::MatrixXd mean(rows, static_cast<Eigen::Index>(width));
  Eigen::MatrixXd sd(rows, static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(width); ++c) {
      const double m = s(i, c) / n;
      const double var = (s(i, c + static_cast<Eigen::Index>(width)) - n * m * m) / (n - 1.0);
      mean(i, c) = m;
      sd(i, c) = std::sqrt(std::max(var, 0.0));
    }
  }
  EnsembleCurves out;
  out.n_trajectories = n_traj;
  for (Eigen::Index i = 0; i + 1 < rows; ++i) out.time.push_back(static_cast<double>(i) * stride * dt);
  out.time.push_back(static_cast<double>(n_steps) * dt);
  const auto nf = static_cast<Eigen::Index>(n_features);
  out.feature_mean = mean.leftCols(nf);
  out.feature_sd = sd.leftCols(nf);
  out.fidelity_mean = mean.col(nf);
  out.fidelity_sd = sd.col(nf);
  out.jstate_mean = mean.col(nf + 1);
  out.jstate_sd = sd.col(nf + 1);
  out.jcontrol_mean = mean.col(nf + 2);
  out.jcontrol_sd = sd.col(nf + 2);
  out.effort_mean = total.effort_ / n;
  return out;
}

}  // namespace

EnsembleCurves ensemble_statistics(const BatchProblem& problem, const Controller& controller,
                                   FeatureMap features, std::size_t n_trajectories,
                                   std::size_t stride) {
  check_stats(problem, controller, n_trajectories, stride);
  const Eigen::Index dim = problem.system->dim();
  const auto n_features = static_cast<std::size_t>(dim * dim);
  const std::size_t points = n_points(problem.sim.n_steps, stride);
  const std::size_t n_chunks = (n_trajectories + kStatsChunk - 1) / kStatsChunk;
  const auto wave = static_cast<std::size_t>(worker_threads());
  ChunkSums total(points, n_features);
  // Chunks run in waves of one per worker so that memory stays bounded for
  // long horizons; merging is always in chunk order.
  for (std::size_t first = 0; first < n_chunks; first += wave) {
    const std::size_t count = std::min(wave, n_chunks - first);
    std::vector<ChunkSums> partial(count, ChunkSums(points, n_features));
    parallel_tasks(count, dim, [&](std::size_t task, StepWorkspace& ws) {
      run_chunk(problem, controller, features, first + task, n_trajectories, stride, partial[task], ws);
    });
    for (const auto& p : partial) total.merge(p);
  }
  return finalize(total, n_features, n_trajectories, problem.sim.n_steps, stride, problem.sim.dt);
}

Eigen::MatrixXd batch_costs(const BatchProblem& problem,
                            const std::vector<const Controller*>& controllers,
                            std::size_t rollouts) {
  check_problem(problem, controllers, rollouts);
  const std::size_t n_params = controllers.size();
  const std::vector<ComplexMatrix> rho0 = initial_states(problem, rollouts);
  Eigen::MatrixXd costs(static_cast<Eigen::Index>(n_params), static_cast<Eigen::Index>(rollouts));
  parallel_tasks(n_params * rollouts, problem.system->dim(), [&](std::size_t task, StepWorkspace& ws) {
    const std::size_t p = task / rollouts;
    const std::size_t r = task % rollouts;
    costs(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r)) =
        rollout_cost(*problem.system, *controllers[p], rho0[r], *problem.cost, problem.sim,
                     rollout_noise(problem, r), ws);
  });
  return costs;
}

std::vector<Trajectory> batch_rollouts(const BatchProblem& problem,
                                       const std::vector<const Controller*>& controllers,
                                       std::size_t rollouts) {
  check_problem(problem, controllers, rollouts);
  const std::vector<ComplexMatrix> rho0 = initial_states(problem, rollouts);
  std::vector<Trajectory> out(controllers.size() * rollouts);
  parallel_tasks(out.size(), problem.system->dim(), [&](std::size_t task, StepWorkspace&) {
    const std::size_t p = task / rollouts;
    const std::size_t r = task % rollouts;
    out[task] = rollout(*problem.system, *controllers[p], DensityState::unchecked(rho0[r]),
                        *problem.cost, problem.sim, rollout_noise(problem, r));
  });
  return out;
}

namespace reference {

Eigen::MatrixXd batch_costs_serial(const BatchProblem& problem,
                                   const std::vector<const Controller*>& controllers,
                                   std::size_t rollouts) {
  check_problem(problem, controllers, rollouts);
  StepWorkspace ws(problem.system->dim());
  Eigen::MatrixXd costs(static_cast<Eigen::Index>(controllers.size()),
                        static_cast<Eigen::Index>(rollouts));
  for (std::size_t p = 0; p < controllers.size(); ++p) {
    for (std::size_t r = 0; r < rollouts; ++r) {
      const DensityState rho0 =
          problem.initial.state(problem.seed, problem.initial_domain, problem.iteration, r);
      costs(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r)) =
          rollout_cost(*problem.system, *controllers[p], rho0.matrix(), *problem.cost,
                       problem.sim, rollout_noise(problem, r), ws);
    }
  }
  return costs;
}

std::vector<Trajectory> batch_rollouts_serial(const BatchProblem& problem,
                                              const std::vector<const Controller*>& controllers,
                                              std::size_t rollouts) {
  check_problem(problem, controllers, rollouts);
  std::vector<Trajectory> out;
  out.reserve(controllers.size() * rollouts);
  for (std::size_t p = 0; p < controllers.size(); ++p) {
    for (std::size_t r = 0; r < rollouts; ++r) {
      const DensityState rho0 =
          problem.initial.state(problem.seed, problem.initial_domain, problem.iteration, r);
      out.push_back(rollout(*problem.system, *controllers[p], rho0, *problem.cost, problem.sim,
                            rollout_noise(problem, r)));
    }
  }
  return out;
}

EnsembleCurves ensemble_statistics_serial(const BatchProblem& problem, const Controller& controller,
                                          FeatureMap features, std::size_t n_trajectories,
                                          std::size_t stride) {
  check_stats(problem, controller, n_trajectories, stride);
  const Eigen::Index dim = problem.system->dim();
  const auto n_features = static_cast<std::size_t>(dim * dim);
  const std::size_t points = n_points(problem.sim.n_steps, stride);
  const std::size_t n_chunks = (n_trajectories + kStatsChunk - 1) / kStatsChunk;
  StepWorkspace ws(dim);
  ChunkSums total(points, n_features);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    ChunkSums chunk(points, n_features);
    run_chunk(problem, controller, features, c, n_trajectories, stride, chunk, ws);
    total.merge(chunk);
  }
  return finalize(total, n_features, n_trajectories, problem.sim.n_steps, stride, problem.sim.dt);
}

}  // namespace reference

}  // namespace qfb
