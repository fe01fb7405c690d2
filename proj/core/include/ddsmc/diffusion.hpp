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

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "ddsmc/gaussian.hpp"
#include "ddsmc/schedule.hpp"

namespace ddsmc {

// Approximation of the time-t score grad log q(x_t). Implementations must be
// pure (same input, same output) and safe to call concurrently.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual Eigen::Index dim() const = 0;
  virtual void Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                        Eigen::Ref<Eigen::VectorXd> out) const = 0;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x, int t) const;

  // The same model in rotated coordinates x' = V^T x, i.e.
  // s'(x') = V^T s(V x'). The default wraps *this, which must outlive the
  // result; models that are rotation-covariant in closed form override it.
  virtual std::unique_ptr<ScoreModel> InBasis(const Eigen::MatrixXd& v) const;
};

// Adapts a callable; handy for tests and toy priors.
class FunctionScore final : public ScoreModel {
 public:
  using Fn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>;
  FunctionScore(Eigen::Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}

  Eigen::Index dim() const override { return dim_; }
  void Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, int t,
                Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  Eigen::Index dim_;
  Fn fn_;
};

enum class ReconstructionKind { kTweedie, kOde };

struct Reconstruction {
  ReconstructionKind kind = ReconstructionKind::kTweedie;
  // Cap on deterministic DDIM steps for kOde. Fewer are used when fewer
  // generation times remain below t.
  int max_steps = 5;

  static Reconstruction Tweedie() { return {ReconstructionKind::kTweedie, 1}; }
  static Reconstruction Ode(int max_steps) { return {ReconstructionKind::kOde, max_steps}; }
  // Every remaining generation time ("as many steps as are left").
  static Reconstruction OdeAllSteps() { return {ReconstructionKind::kOde, 1 << 30}; }
};

std::string ToString(const Reconstruction& recon);

// E[x_0 | x_t] from the score:
//   VE: x + sigma_t^2 s(x, t)
//   VP: (x + (1 - alpha_bar_t) s(x, t)) / sqrt(alpha_bar_t)
Eigen::VectorXd TweedieReconstruct(const ScoreModel& score, const Eigen::VectorXd& x,
                                   int t, const NoiseSchedule& sched);

// Times visited by an ODE reconstruction from t: t first, 0 last, at most
// max_steps jumps, chosen evenly among the generation times at or below t.
std::vector<int> OdeTimeGrid(const NoiseSchedule& sched, int t, int max_steps);

// Deterministic DDIM integration from t down to 0. The VP update from t to
// s < t is
//   x_s = r x_t + ((1 - abar_t) r - sqrt((1 - abar_s)(1 - abar_t))) score,
//   r = sqrt(abar_s / abar_t);
// the VE analogue is x_s = x_t + (sigma_t^2 - sigma_t sigma_s) score.
Eigen::VectorXd OdeReconstruct(const ScoreModel& score, const Eigen::VectorXd& x,
                               int t, const NoiseSchedule& sched, int max_steps);

Eigen::VectorXd Reconstruct(const ScoreModel& score, const Eigen::VectorXd& x, int t,
                            const NoiseSchedule& sched, const Reconstruction& method);

// Isotropic Gaussian kernel N(recon_coef * x0 + state_coef * x_next, var I)
// obtained by tempering q(x_next | x_t) with eta and combining it with
// q(x_t | x_0).
struct KernelCoefficients {
  double recon_coef = 0.0;
  double state_coef = 0.0;
  double var = 0.0;
};

// VE, beta = sigma_next^2 - sigma_t^2, D = eta sigma_t^2 + beta:
//   recon = beta / D, state = eta sigma_t^2 / D, var = beta sigma_t^2 / D.
// VP, beta = 1 - abar_next / abar_t, D = eta - eta beta - eta abar_next + beta:
//   recon = sqrt(abar_t) beta / D, state = eta sqrt(1 - beta)(1 - abar_t) / D,
//   var = beta (1 - abar_t) / D.
KernelCoefficients BackwardKernel(int t, int t_next, double eta, const NoiseSchedule& sched);

// p^eta(x_t | x_next) with x_0 := x0hat, where x_next lives at the next-larger
// generation time. eta = 0 is fully decoupled from x_next.
DiagGaussian PriorTransition(const Eigen::VectorXd& x_next, const Eigen::VectorXd& x0hat,
                             int t, double eta, const NoiseSchedule& sched);

}  // namespace ddsmc
