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
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "ddsmc/diffusion.hpp"
#include "ddsmc/gaussian.hpp"
#include "ddsmc/measurement.hpp"
#include "ddsmc/schedule.hpp"
#include "ddsmc/smc.hpp"

namespace ddsmc {

// How the renoising variance lambda_t^2 of the proposal is chosen.
enum class LambdaMode {
  // Matches the proposal to the prior kernel when the measurement carries no
  // information (sigma_y -> inf).
  kMatched,
  // lambda_t^2 equals the prior kernel variance itself (sigma_t^2 / 1 - abar_t
  // at eta = 0), i.e. plain renoising of a posterior draw.
  kDapsStyle,
};

struct RhoMode {
  enum class Kind { kGmmDefault, kPowerInterp, kConstant };
  Kind kind = Kind::kGmmDefault;
  double rho_max = 0.0;  // kPowerInterp
  double rho_min = 0.0;  // kPowerInterp
  double value = 0.0;    // kConstant

  static RhoMode GmmDefault() { return {}; }
  static RhoMode PowerInterp(double rho_max, double rho_min) {
    return {Kind::kPowerInterp, rho_max, rho_min, 0.0};
  }
  static RhoMode Constant(double value) { return {Kind::kConstant, 0.0, 0.0, value}; }
};

// rho_t for t = 0..T with rho_0 = 0.
//   kGmmDefault (VP): rho_t^2 = (1 - abar_t) / sqrt(2)
//   kPowerInterp:     1/7-power interpolation between rho_max (t = T) and rho_min (t = 1)
//   kConstant:        rho_t = value for t > 0
std::vector<double> RhoSchedule(const NoiseSchedule& sched, const RhoMode& mode);

struct DdsmcConfig {
  double eta = 0.0;
  Reconstruction recon = Reconstruction::Tweedie();
  int num_particles = 256;
  NoiseSchedule sched;
  std::vector<double> rho;  // indexed by diffusion time, rho[0] = 0
  LambdaMode lambda_mode = LambdaMode::kMatched;

  void Validate() const;
};

struct LambdaSq {
  double value = 0.0;
  bool clamped = false;  // the matched value was negative and was raised to 0
};

// lambda_t^2 for the proposal into t from the next-larger generation time.
// Matched: prior kernel variance minus recon_coef^2 rho_next^2, clamped at 0;
// for VE at eta = 0 this is sigma_t^2 - rho_next^2, for VP 1 - abar_t (1 + rho_next^2).
LambdaSq ComputeLambdaSq(int t, double eta, const NoiseSchedule& sched,
                         const std::vector<double>& rho,
                         LambdaMode mode = LambdaMode::kMatched);

// r_t(x_t | x_next, y) for t > 0: the x0 posterior N(mu, M^-1) pushed through
// the eta-tempered kernel,
//   mean = recon_coef mu + state_coef x_next,  var = lambda^2 + recon_coef^2 M^-1.
// All vectors live in the whitened basis.
DiagGaussian Proposal(const Eigen::VectorXd& x_next, const WhitenedMeasurement& w, int t,
                      const DdsmcConfig& cfg, const Eigen::VectorXd& x0hat);

// r_0 is a point mass at the x0 posterior mean given x_1.
Eigen::VectorXd ProposalT0(const Eigen::VectorXd& x_1, const WhitenedMeasurement& w,
                           const DdsmcConfig& cfg, const Eigen::VectorXd& x0hat);

// Log-density pieces of one particle's incremental weight. Entries left NaN
// are "not computed yet".
struct TargetEvaluation {
  double approx_loglik = std::numeric_limits<double>::quiet_NaN();       // log p~(y | x_t)
  double prev_approx_loglik = std::numeric_limits<double>::quiet_NaN();  // log p~(y | x_next)
  double log_transition = std::numeric_limits<double>::quiet_NaN();      // log p^eta(x_t | x_next)
  double log_proposal = std::numeric_limits<double>::quiet_NaN();        // log r_t(x_t | x_next, y)
  double exact_loglik = std::numeric_limits<double>::quiet_NaN();        // log p(y | x_0)
};

enum class WeightBranch { kFirst, kIntermediate, kFinal };

// Incremental log-weight:
//   kFirst:        log p~(y | x_T)
//   kIntermediate: log p~(y|x_t) + log p^eta(x_t|x_next) - log p~(y|x_next) - log r_t
//   kFinal:        log p(y | x_0) - log p~(y | x_1)
// Throws SequencingError when a required term is missing.
double LogWeight(WeightBranch branch, const TargetEvaluation& terms);

struct DdsmcParticle {
  Eigen::VectorXd x;       // state at the current time (whitened basis)
  Eigen::VectorXd x0hat;   // reconstruction from x (valid after weighting at t > 0)
  TargetEvaluation terms;
};

// The Algorithm-1 model for RunSmc, entirely in the whitened basis.
class DdsmcModel {
 public:
  using Particle = DdsmcParticle;

  // score_w must be expressed in the whitened basis of w.
  DdsmcModel(const ScoreModel& score_w, const WhitenedMeasurement& w, const DdsmcConfig& cfg);

  int num_steps() const { return static_cast<int>(cfg_.sched.times().size()) - 1; }
  int time_at(int k) const { return cfg_.sched.times()[static_cast<std::size_t>(k)]; }
  int lambda_clamped_steps() const { return clamped_steps_; }

  Particle Init(CounterRng& rng) const;
  double Weigh(Particle& p, int k) const;
  void Propose(Particle& p, int k, CounterRng& rng) const;

 private:
  struct StepPlan {
    KernelCoefficients kernel;
    double lambda_sq = 0.0;
    double rho_next = 0.0;
  };

  const ScoreModel& score_;
  const WhitenedMeasurement& w_;
  const DdsmcConfig& cfg_;
  std::vector<StepPlan> plan_;  // plan_[k] moves from times[k] to times[k+1]
  int clamped_steps_ = 0;
};

struct DdsmcResult {
  Eigen::MatrixXd samples;       // d_x x N, original basis
  std::vector<double> weights;   // normalized final weights
  Eigen::VectorXd draw;          // one multinomial draw from the weighted ensemble
  std::vector<StepRecord> trace;
  int lambda_clamped_steps = 0;

  double MinEss() const;
  // n multinomial draws (columns) from the final weighted ensemble.
  Eigen::MatrixXd Draw(int n, std::uint64_t seed) const;
};

// Whitens the measurement and rotates the score once; Run() may then be
// called for many seeds.
class DdsmcSampler {
 public:
  DdsmcSampler(const ScoreModel& score, const MeasurementModel& model, const Eigen::VectorXd& y,
               DdsmcConfig cfg);

  DdsmcResult Run(std::uint64_t seed) const;

  const WhitenedMeasurement& whitened() const { return w_; }
  const DdsmcConfig& config() const { return cfg_; }

 private:
  DdsmcConfig cfg_;
  WhitenedMeasurement w_;
  std::unique_ptr<ScoreModel> score_w_;
};

}  // namespace ddsmc
