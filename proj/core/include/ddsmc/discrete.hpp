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

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "ddsmc/random.hpp"
#include "ddsmc/smc.hpp"

namespace ddsmc {

// Q = (1 - beta) I + beta 11^T / d, stored through its two distinct entries.
struct UniformKernel {
  int d = 2;
  double beta = 0.0;

  double keep() const { return 1.0 - beta + beta / d; }
  double move() const { return beta / d; }
  double operator()(int from, int to) const { return from == to ? keep() : move(); }

  Eigen::MatrixXd Matrix() const;
  // Row-vector times Q for every row of probs (D x d).
  Eigen::MatrixXd Apply(const Eigen::MatrixXd& probs) const;
  void Validate() const;
};

// Q_1 Q_2 ... Q_n in closed form: 1 - beta_bar = prod (1 - beta_s).
UniformKernel CumulativeKernel(int d, const std::vector<double>& betas);

// One state per variable.
using DiscreteState = Eigen::VectorXi;

// D x d matrix whose rows are one-hot encodings of state.
Eigen::MatrixXd OneHot(const DiscreteState& state, int d);

// D3PM-uniform forward process with betas beta_1..beta_T. Generation visits
// every t = T..0.
class DiscreteSchedule {
 public:
  DiscreteSchedule(int d, std::vector<double> betas);

  // beta_t = 1 / (T - t + 1), so beta_bar_t = t / T and x_T is uniform.
  static DiscreteSchedule Linear(int d, int num_steps);

  int d() const { return d_; }
  int num_steps() const { return static_cast<int>(betas_.size()); }
  const std::vector<double>& betas() const { return betas_; }
  // Q-bar_t (identity at t = 0).
  UniformKernel Cumulative(int t) const;

 private:
  int d_;
  std::vector<double> betas_;
  std::vector<double> retention_;  // prod_{s<=t} (1 - beta_s), index t
};

// Explicit joint table over d^D outcomes. Outcome index = sum_j x_j d^j.
class ToyDiscretePrior {
 public:
  ToyDiscretePrior(int num_vars, int d, Eigen::VectorXd table);

  // p(x) proportional to exp(coupling * #{j : x_j = x_{j+1}} + field * [x_0 = 0]).
  static ToyDiscretePrior IsingChain(int num_vars, int d, double coupling, double field);
  static ToyDiscretePrior Uniform(int num_vars, int d);

  int num_vars() const { return num_vars_; }
  int d() const { return d_; }
  Eigen::Index num_outcomes() const { return table_.size(); }
  const Eigen::VectorXd& table() const { return table_; }

  Eigen::Index Encode(const DiscreteState& x) const;
  DiscreteState Decode(Eigen::Index index) const;
  // D x d per-variable marginals.
  Eigen::MatrixXd Marginals() const;
  DiscreteState Sample(CounterRng& rng) const;

 private:
  int num_vars_;
  int d_;
  Eigen::VectorXd table_;
  std::vector<DiscreteState> outcomes_;
};

void SaveToyPrior(const ToyDiscretePrior& prior, const std::filesystem::path& path);
ToyDiscretePrior LoadToyPrior(const std::filesystem::path& path);

// Per-variable p(x0_j | x_t) by enumerating the joint, with x_t emitted from
// x0 through q_bar independently per variable.
Eigen::MatrixXd ExactDenoiser(const ToyDiscretePrior& prior, const DiscreteState& x_t,
                              const UniformKernel& q_bar);

// (p(y_j | .) * pred_j) / Z_j per variable. Throws DegenerateError if Z_j = 0.
Eigen::MatrixXd DiscretePosteriorX0(const Eigen::MatrixXd& pred, const DiscreteState& y,
                                    const UniformKernel& q_y);

// sum_j log sum_k p(y_j | k) pred[j, k].
double DiscreteApproxLogLik(const Eigen::MatrixXd& pred, const DiscreteState& y,
                            const UniformKernel& q_y);

// sum_j log p(y_j | x0_j).
double DiscreteExactLogLik(const DiscreteState& x0, const DiscreteState& y,
                           const UniformKernel& q_y);

// Per-variable law of x_t: posterior rows pushed through q_bar.
Eigen::MatrixXd DiscreteProposal(const Eigen::MatrixXd& x0_posterior, const UniformKernel& q_bar);

// Independent per-variable inverse-CDF draw from the rows of probs.
DiscreteState SampleRows(const Eigen::MatrixXd& probs, CounterRng& rng);
double RowsLogPmf(const Eigen::MatrixXd& probs, const DiscreteState& x);

// p(x0 | y) over all outcomes by enumeration. Requires d^D <= 65536.
Eigen::VectorXd BruteForcePosterior(const ToyDiscretePrior& prior, const DiscreteState& y,
                                    const UniformKernel& q_y);

// Law of x_0 produced by the unconditional reverse chain built from the
// factorized exact denoiser, by exact enumeration of every step. Differs from
// the table when variables are dependent, since the chain only sees marginals.
Eigen::VectorXd InducedPrior(const ToyDiscretePrior& prior, const DiscreteSchedule& sched);

struct D3smcParticle {
  DiscreteState x;
  Eigen::MatrixXd pred;  // ExactDenoiser output at the current time
  double approx_loglik = std::numeric_limits<double>::quiet_NaN();
  double prev_approx_loglik = std::numeric_limits<double>::quiet_NaN();
  double log_transition = std::numeric_limits<double>::quiet_NaN();
  double log_proposal = std::numeric_limits<double>::quiet_NaN();
};

class D3smcModel {
 public:
  using Particle = D3smcParticle;

  D3smcModel(const ToyDiscretePrior& prior, const DiscreteState& y, const UniformKernel& q_y,
             const DiscreteSchedule& sched);

  int num_steps() const { return sched_.num_steps(); }
  int time_at(int k) const { return sched_.num_steps() - k; }

  Particle Init(CounterRng& rng) const;
  double Weigh(Particle& p, int k) const;
  void Propose(Particle& p, int k, CounterRng& rng) const;

 private:
  const ToyDiscretePrior& prior_;
  DiscreteState y_;
  UniformKernel q_y_;
  const DiscreteSchedule& sched_;
};

struct D3smcResult {
  std::vector<DiscreteState> samples;
  std::vector<double> weights;
  std::vector<StepRecord> trace;

  // Weighted outcome histogram (normalized) over the prior's outcome indexing.
  Eigen::VectorXd Histogram(const ToyDiscretePrior& prior) const;
};

D3smcResult RunD3smc(const ToyDiscretePrior& prior, const DiscreteState& y,
                     const UniformKernel& q_y, const DiscreteSchedule& sched, int num_particles,
                     std::uint64_t seed);

}  // namespace ddsmc
