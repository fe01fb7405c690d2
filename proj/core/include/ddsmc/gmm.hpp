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
#include <memory>

#include <Eigen/Core>

#include "ddsmc/diffusion.hpp"
#include "ddsmc/measurement.hpp"
#include "ddsmc/random.hpp"
#include "ddsmc/schedule.hpp"

namespace ddsmc {

// Mixture sharing one diagonal covariance across components:
//   sum_k w_k N(means.col(k), diag(var)).
struct DiagMixture {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;  // d x K
  Eigen::VectorXd var;    // d

  Eigen::VectorXd Mean() const;
  Eigen::VectorXd Sample(CounterRng& rng) const;
  int SampleComponent(CounterRng& rng) const;
};

// Gaussian mixture with identity component covariances. Under the VP forward
// process its time-t marginal is sum_k w_k N(sqrt(abar_t) mu_k, I), so the
// score and all conditionals stay in closed form.
class GmmPrior {
 public:
  GmmPrior(Eigen::VectorXd weights, Eigen::MatrixXd means);

  Eigen::Index dim() const { return means_.rows(); }
  int num_components() const { return static_cast<int>(means_.cols()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::MatrixXd& means() const { return means_; }

  // Same mixture expressed in coordinates x' = R x for orthogonal R.
  GmmPrior Rotated(const Eigen::MatrixXd& r) const;

  double LogDensity(const Eigen::VectorXd& x0) const;
  Eigen::VectorXd Sample(CounterRng& rng) const;

  // log q(x_t) and its gradient under a VP schedule.
  double MarginalLogDensity(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                            const NoiseSchedule& sched) const;
  void Score(const Eigen::Ref<const Eigen::VectorXd>& x, int t, const NoiseSchedule& sched,
             Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd Score(const Eigen::VectorXd& x, int t, const NoiseSchedule& sched) const;

  // Exact x_t ~ q(x_t).
  Eigen::VectorXd SampleMarginal(int t, const NoiseSchedule& sched, CounterRng& rng) const;

  // Exact p(x_0 | x_t): component k has mean mu_k + sqrt(abar)(x_t - sqrt(abar) mu_k)
  // and covariance (1 - abar) I, weighted by w_k N(x_t | sqrt(abar) mu_k, I).
  DiagMixture PosteriorX0(const Eigen::VectorXd& x, int t, const NoiseSchedule& sched) const;

  // Responsibilities of the time-t marginal (normalized in log space).
  Eigen::VectorXd Responsibilities(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   double signal_scale) const;

 private:
  Eigen::VectorXd weights_;
  Eigen::VectorXd log_weights_;
  Eigen::MatrixXd means_;         // d x K
  Eigen::VectorXd mean_sq_norms_; // K
};

// ScoreModel view of a GmmPrior under a VP schedule. Rotations are exact: the
// rotated model rotates the component means.
class GmmScore final : public ScoreModel {
 public:
  GmmScore(GmmPrior prior, NoiseSchedule sched);

  Eigen::Index dim() const override { return prior_.dim(); }
  void Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                Eigen::Ref<Eigen::VectorXd> out) const override;
  std::unique_ptr<ScoreModel> InBasis(const Eigen::MatrixXd& v) const override;

  const GmmPrior& prior() const { return prior_; }

 private:
  GmmPrior prior_;
  NoiseSchedule sched_;
};

struct GmmProblem {
  GmmPrior prior;
  MeasurementModel model;
  Eigen::VectorXd y;
  Eigen::VectorXd x_star;  // latent draw that generated y
  Eigen::VectorXd eps;     // y = A x_star + sigma_y eps
  std::uint64_t seed = 0;
};

struct GmmProblemOptions {
  int num_components = 25;
  double lattice_scale = 8.0;
  double sigma_y = 1.0;
};

// Component means on a square lattice (spacing lattice_scale, centred on 0)
// in the first two coordinates and standard normal elsewhere; Dirichlet(1)
// weights; A with iid N(0, 1) entries; x_star from the prior; y from the model.
GmmProblem GenerateProblem(int dim_x, int dim_y, std::uint64_t seed,
                           const GmmProblemOptions& options = {});

// Exact p(x_0 | y) in the whitened basis of w: component weights proportional
// to w_k N(y' | S mu'_k, sigma^2 I + S S^T); component law N(C(mu'_k + S^T y'/sigma^2), C)
// with C = (I + S^T S / sigma^2)^{-1} diagonal.
DiagMixture GmmExactPosteriorWhitened(const GmmPrior& prior, const WhitenedMeasurement& w);

// n exact posterior draws in the original basis, one column each.
Eigen::MatrixXd GmmExactPosteriorSample(const GmmProblem& problem, int n, std::uint64_t seed);

// n exact prior draws, one column each.
Eigen::MatrixXd GmmPriorSample(const GmmPrior& prior, int n, std::uint64_t seed);

void SaveProblem(const GmmProblem& problem, const std::filesystem::path& path);
GmmProblem LoadProblem(const std::filesystem::path& path);

}  // namespace ddsmc
