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

// Serial reference kernels against their OpenMP counterparts.
//
//   bench_batch --benchmark_filter=Costs
//   QFB_NUM_THREADS=4 bench_batch

#include <benchmark/benchmark.h>

#include "qfb/baseline.hpp"
#include "qfb/batch.hpp"

namespace {

using namespace qfb;

struct Setup {
  QndSystem sys = two_qubit_system(1.0);
  CostSpec cost = default_cost_spec(bell_psi_plus(), 2);
  PolicySpec spec = linear_policy_spec(FeatureMap::pauli, 4, 2);
  std::vector<Policy> policies;
  std::vector<const Controller*> controllers;
  BatchProblem problem;

  Setup(std::size_t n_policies, std::size_t n_steps) {
    for (std::size_t p = 0; p < n_policies; ++p) policies.emplace_back(spec, init_params(spec, p));
    for (const auto& p : policies) controllers.push_back(&p);
    problem.system = &sys;
    problem.cost = &cost;
    problem.sim.n_steps = n_steps;
    problem.seed = SeedSpec(1);
    problem.initial = InitialStateSource::random_pure(4);
  }
};

void BM_CostsSerial(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)), 1000);
  const auto rollouts = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::batch_costs_serial(s.problem, s.controllers, rollouts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1) * 1000);
}

void BM_CostsParallel(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)), 1000);
  const auto rollouts = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(batch_costs(s.problem, s.controllers, rollouts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1) * 1000);
  state.counters["threads"] = worker_threads();
}

void BM_EnsembleSerial(benchmark::State& state) {
  Setup s(1, 1000);
  const BaselineController ctrl(default_baseline_spec(2), s.sys, bell_psi_plus());
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::ensemble_statistics_serial(s.problem, ctrl, FeatureMap::pauli, n, 10));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}

void BM_EnsembleParallel(benchmark::State& state) {
  Setup s(1, 1000);
  const BaselineController ctrl(default_baseline_spec(2), s.sys, bell_psi_plus());
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ensemble_statistics(s.problem, ctrl, FeatureMap::pauli, n, 10));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
  state.counters["threads"] = worker_threads();
}

// Items are simulated steps.
BENCHMARK(BM_CostsSerial)->Args({16, 4})->Args({64, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostsParallel)->Args({16, 4})->Args({64, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleSerial)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
