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

#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <vector>

#include "ddsmc/error.hpp"
#include "ddsmc/parallel.hpp"
#include "ddsmc/random.hpp"

namespace ddsmc {

// Softmax of log-weights with max-subtraction; -inf maps to 0. Throws
// DegenerateError if no entry is finite (or any is NaN / +inf).
std::vector<double> Normalize(const std::vector<double>& log_weights);

// log(mean(exp(log_weights))), the normalizing-constant increment of a step
// whose incoming weights were uniform.
double LogMeanExp(const std::vector<double>& log_weights);

// 1 / sum w_i^2 for normalized weights.
double Ess(const std::vector<double>& weights);

// n iid ancestor indices from Categorical(weights) by inverse CDF.
std::vector<int> MultinomialAncestors(const std::vector<double>& weights, int n,
                                      CounterRng& rng);

// Copies the selected ancestors (resampling). Log-weights are reset by the caller.
template <typename T>
std::vector<T> Gather(const std::vector<T>& items, const std::vector<int>& ancestors) {
  std::vector<T> out;
  out.reserve(ancestors.size());
  for (int a : ancestors) out.push_back(items[static_cast<std::size_t>(a)]);
  return out;
}

struct StepRecord {
  int step = 0;
  int time = 0;
  double ess = 0.0;              // before resampling
  double log_evidence_increment = 0.0;
};

template <typename Particle>
struct SmcResult {
  std::vector<Particle> particles;
  std::vector<double> log_weights;  // final, unnormalized
  std::vector<double> weights;      // final, normalized
  std::vector<StepRecord> trace;

  double LogEvidence() const {
    double total = 0.0;
    for (const auto& r : trace) total += r.log_evidence_increment;
    return total;
  }
};

struct SmcOptions {
  int num_particles = 1;
  std::uint64_t seed = 0;
  // Resampling on every step except the last, as in the reference algorithm.
  // Disabling it is only meant for testing weight bookkeeping.
  bool resample = true;
};

// A model drives the engine over `num_steps() + 1` weighting points
// k = 0..K. At k = 0 the particles come from Init; after weighting at k < K
// the ensemble is resampled and every particle is moved by Propose(p, k, rng)
// to the next point. Weigh(p, k) returns the incremental log-weight at k and
// may update the particle's caches.
template <typename M>
concept SmcModel = requires(const M& m, typename M::Particle& p, int k, CounterRng& rng) {
  typename M::Particle;
  { m.num_steps() } -> std::convertible_to<int>;
  { m.time_at(k) } -> std::convertible_to<int>;
  { m.Init(rng) } -> std::same_as<typename M::Particle>;
  { m.Weigh(p, k) } -> std::convertible_to<double>;
  { m.Propose(p, k, rng) };
};

// Weigh and Propose run data-parallel over particles; normalization and
// resampling are serial barriers. Per-particle randomness is keyed on
// (seed, step, particle), so the output is identical for any thread count.
template <SmcModel M>
SmcResult<typename M::Particle> RunSmc(const M& model, const SmcOptions& opts) {
  using Particle = typename M::Particle;
  const int n = opts.num_particles;
  if (n < 1) throw ParameterError("need at least one particle");
  const int last = model.num_steps();

  std::vector<Particle> particles(static_cast<std::size_t>(n));
  ParallelFor(static_cast<std::size_t>(n), [&](std::size_t i) {
    CounterRng rng(MakeKey(opts.seed, RandomDomain::kInit, 0, static_cast<std::uint32_t>(i)));
    particles[i] = model.Init(rng);
  });

  SmcResult<Particle> result;
  std::vector<double> log_weights(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k <= last; ++k) {
    ParallelFor(static_cast<std::size_t>(n),
                [&](std::size_t i) { log_weights[i] = model.Weigh(particles[i], k); });
    std::vector<double> weights = Normalize(log_weights);
    result.trace.push_back({k, model.time_at(k), Ess(weights), LogMeanExp(log_weights)});
    if (k == last) {
      result.weights = std::move(weights);
      break;
    }
    if (opts.resample) {
      CounterRng rng(MakeKey(opts.seed, RandomDomain::kResample, static_cast<std::uint32_t>(k)));
      particles = Gather(particles, MultinomialAncestors(weights, n, rng));
    }
    ParallelFor(static_cast<std::size_t>(n), [&](std::size_t i) {
      CounterRng rng(MakeKey(opts.seed, RandomDomain::kPropose, static_cast<std::uint32_t>(k),
                             static_cast<std::uint32_t>(i)));
      model.Propose(particles[i], k, rng);
    });
  }
  result.particles = std::move(particles);
  result.log_weights = std::move(log_weights);
  return result;
}

}  // namespace ddsmc
