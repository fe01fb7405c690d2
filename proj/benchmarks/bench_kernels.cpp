/* Copyright 2026 The DDSMC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include "ddsmc/ddsmc.hpp"
#include "ddsmc/discrete.hpp"
#include "ddsmc/gmm.hpp"
#include "ddsmc/metrics.hpp"
#include "ddsmc/parallel.hpp"

namespace {

ddsmc::DdsmcConfig SamplerConfig(int particles) {
  ddsmc::DdsmcConfig cfg;
  cfg.eta = 1.0;
  cfg.num_particles = particles;
  cfg.sched = ddsmc::BuildVpSchedule(1000, 1e-4, 0.02).WithEvenTimes(20);
  cfg.rho = ddsmc::RhoSchedule(cfg.sched, ddsmc::RhoMode::GmmDefault());
  return cfg;
}

void BM_GmmScore(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const ddsmc::GmmProblem problem = ddsmc::GenerateProblem(d, 4, 0);
  const ddsmc::NoiseSchedule sched = ddsmc::BuildVpSchedule(1000, 1e-4, 0.02);
  const ddsmc::GmmScore score(problem.prior, sched);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(d);
  Eigen::VectorXd out(d);
  for (auto _ : state) {
    score.Evaluate(x, 500, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_GmmScore)->Arg(8)->Arg(80);

void BM_SlicedWasserstein(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ddsmc::GmmProblem problem = ddsmc::GenerateProblem(8, 4, 0);
  const Eigen::MatrixXd a = ddsmc::GmmPriorSample(problem.prior, n, 1);
  const Eigen::MatrixXd b = ddsmc::GmmPriorSample(problem.prior, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ddsmc::SlicedWasserstein(a, b));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SlicedWasserstein)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_DdsmcRun(benchmark::State& state) {
  const ddsmc::ThreadLimit limit(1);
  const int particles = static_cast<int>(state.range(0));
  const ddsmc::GmmProblem problem = ddsmc::GenerateProblem(8, 4, 0);
  const ddsmc::DdsmcConfig cfg = SamplerConfig(particles);
  const ddsmc::GmmScore score(problem.prior, cfg.sched);
  const ddsmc::DdsmcSampler sampler(score, problem.model, problem.y, cfg);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.Run(seed++).draw.data());
  state.SetItemsProcessed(state.iterations() * particles * 20);
}
BENCHMARK(BM_DdsmcRun)->Arg(16)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_D3smcRun(benchmark::State& state) {
  const ddsmc::ThreadLimit limit(1);
  const auto prior = ddsmc::ToyDiscretePrior::IsingChain(4, 3, 1.5, 0.5);
  const auto sched = ddsmc::DiscreteSchedule::Linear(3, 100);
  const ddsmc::UniformKernel q_y{3, 0.6};
  const ddsmc::DiscreteState y = ddsmc::DiscreteState::Zero(4);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ddsmc::RunD3smc(prior, y, q_y, sched, 256, seed++).weights.data());
  }
}
BENCHMARK(BM_D3smcRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
