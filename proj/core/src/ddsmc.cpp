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

#include "ddsmc/ddsmc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddsmc/error.hpp"

namespace ddsmc {
namespace {

double LambdaFromKernel(const KernelCoefficients& kc, double rho_next, LambdaMode mode,
                        bool* clamped) {
  *clamped = false;
  if (mode == LambdaMode::kDapsStyle) return kc.var;
  const double value = kc.var - kc.recon_coef * kc.recon_coef * rho_next * rho_next;
  if (value < 0.0) {
    *clamped = true;
    return 0.0;
  }
  return value;
}

DiagGaussian ProposalFromPlan(const Eigen::VectorXd& x_next, const Eigen::VectorXd& x0hat,
                              const WhitenedMeasurement& w, const KernelCoefficients& kc,
                              double lambda_sq, double rho_next) {
  DiagGaussian post = PosteriorX0(x0hat, rho_next, w);
  DiagGaussian out;
  out.mean = kc.recon_coef * post.mean + kc.state_coef * x_next;
  out.var = (kc.recon_coef * kc.recon_coef) * post.var.array() + lambda_sq;
  return out;
}

void Require(double value, const char* what) {
  if (std::isnan(value)) {
    throw SequencingError(std::string("log-weight term missing: ") + what);
  }
}

}  // namespace

std::vector<double> RhoSchedule(const NoiseSchedule& sched, const RhoMode& mode) {
  const int steps = sched.num_steps();
  if (steps < 1) throw ParameterError("rho schedule needs a non-empty noise schedule");
  std::vector<double> rho(static_cast<std::size_t>(steps) + 1, 0.0);
  switch (mode.kind) {
    case RhoMode::Kind::kGmmDefault:
      if (sched.kind() != ScheduleKind::kVariancePreserving) {
        throw ParameterError("default rho schedule requires a VP noise schedule");
      }
      for (int t = 1; t <= steps; ++t) {
        rho[static_cast<std::size_t>(t)] = std::sqrt((1.0 - sched.alpha_bar(t)) / std::sqrt(2.0));
      }
      break;
    case RhoMode::Kind::kPowerInterp: {
      if (!(mode.rho_max > 0.0) || !(mode.rho_min > 0.0) || mode.rho_min > mode.rho_max) {
        throw ParameterError("power rho schedule needs 0 < rho_min <= rho_max");
      }
      const std::vector<double> values = PowerInterpolation(mode.rho_max, mode.rho_min, steps);
      for (int t = 1; t <= steps; ++t) {
        rho[static_cast<std::size_t>(t)] = values[static_cast<std::size_t>(t - 1)];
      }
      break;
    }
    case RhoMode::Kind::kConstant:
      if (!(mode.value > 0.0)) throw ParameterError("constant rho must be positive");
      std::fill(rho.begin() + 1, rho.end(), mode.value);
      break;
  }
  return rho;
}

void DdsmcConfig::Validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in [0, 1]");
  if (num_particles < 1) throw ParameterError("need at least one particle");
  if (sched.num_steps() < 1) throw ParameterError("noise schedule is empty");
  if (recon.max_steps < 1) throw ParameterError("reconstruction needs max_steps >= 1");
  if (rho.size() != static_cast<std::size_t>(sched.num_steps()) + 1) {
    std::ostringstream msg;
    msg << "rho has " << rho.size() << " entries, expected " << sched.num_steps() + 1;
    throw ParameterError(msg.str());
  }
  if (rho[0] != 0.0) throw ParameterError("rho_0 must be 0");
  for (int t : sched.times()) {
    if (t > 0 && !(rho[static_cast<std::size_t>(t)] > 0.0)) {
      throw ParameterError("rho_t must be positive for t > 0");
    }
  }
}

LambdaSq ComputeLambdaSq(int t, double eta, const NoiseSchedule& sched,
                         const std::vector<double>& rho, LambdaMode mode) {
  if (t <= 0) throw ParameterError("lambda is defined for t > 0 only");
  const int t_next = sched.NextLarger(t);
  const KernelCoefficients kc = BackwardKernel(t, t_next, eta, sched);
  LambdaSq out;
  out.value = LambdaFromKernel(kc, rho.at(static_cast<std::size_t>(t_next)), mode, &out.clamped);
  return out;
}

DiagGaussian Proposal(const Eigen::VectorXd& x_next, const WhitenedMeasurement& w, int t,
                      const DdsmcConfig& cfg, const Eigen::VectorXd& x0hat) {
  if (t <= 0) throw ParameterError("use ProposalT0 at t = 0");
  const int t_next = cfg.sched.NextLarger(t);
  const KernelCoefficients kc = BackwardKernel(t, t_next, cfg.eta, cfg.sched);
  const double rho_next = cfg.rho.at(static_cast<std::size_t>(t_next));
  bool clamped = false;
  const double lambda_sq = LambdaFromKernel(kc, rho_next, cfg.lambda_mode, &clamped);
  return ProposalFromPlan(x_next, x0hat, w, kc, lambda_sq, rho_next);
}

Eigen::VectorXd ProposalT0(const Eigen::VectorXd& x_1, const WhitenedMeasurement& w,
                           const DdsmcConfig& cfg, const Eigen::VectorXd& x0hat) {
  (void)x_1;
  const int t_next = cfg.sched.NextLarger(0);
  return PosteriorX0(x0hat, cfg.rho.at(static_cast<std::size_t>(t_next)), w).mean;
}

double LogWeight(WeightBranch branch, const TargetEvaluation& e) {
  switch (branch) {
    case WeightBranch::kFirst:
      Require(e.approx_loglik, "approximate likelihood");
      return e.approx_loglik;
    case WeightBranch::kIntermediate:
      Require(e.approx_loglik, "approximate likelihood");
      Require(e.prev_approx_loglik, "previous approximate likelihood");
      Require(e.log_transition, "prior transition");
      Require(e.log_proposal, "proposal density");
      return e.approx_loglik + e.log_transition - e.prev_approx_loglik - e.log_proposal;
    case WeightBranch::kFinal:
      Require(e.exact_loglik, "exact likelihood");
      Require(e.prev_approx_loglik, "previous approximate likelihood");
      return e.exact_loglik - e.prev_approx_loglik;
  }
  throw ParameterError("unknown weight branch");
}

DdsmcModel::DdsmcModel(const ScoreModel& score_w, const WhitenedMeasurement& w,
                       const DdsmcConfig& cfg)
    : score_(score_w), w_(w), cfg_(cfg) {
  cfg_.Validate();
  if (score_.dim() != w_.dim_x()) throw ParameterError("score and measurement dimensions differ");
  const std::vector<int>& times = cfg_.sched.times();
  plan_.resize(times.size() - 1);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const int t = times[k + 1];
    StepPlan& step = plan_[k];
    step.rho_next = cfg_.rho[static_cast<std::size_t>(times[k])];
    if (t == 0) continue;
    step.kernel = BackwardKernel(t, times[k], cfg_.eta, cfg_.sched);
    bool clamped = false;
    step.lambda_sq = LambdaFromKernel(step.kernel, step.rho_next, cfg_.lambda_mode, &clamped);
    if (clamped) ++clamped_steps_;
  }
}

DdsmcParticle DdsmcModel::Init(CounterRng& rng) const {
  const int t_top = cfg_.sched.times().front();
  const double sd = cfg_.sched.kind() == ScheduleKind::kVariancePreserving
                        ? 1.0
                        : cfg_.sched.sigma(t_top);
  DdsmcParticle p;
  p.x.resize(w_.dim_x());
  for (Eigen::Index i = 0; i < p.x.size(); ++i) p.x[i] = sd * rng.Normal();
  return p;
}

double DdsmcModel::Weigh(DdsmcParticle& p, int k) const {
  const int t = time_at(k);
  TargetEvaluation& e = p.terms;
  if (t > 0) {
    p.x0hat = Reconstruct(score_, p.x, t, cfg_.sched, cfg_.recon);
    e.approx_loglik = ApproxLogLik(p.x0hat, cfg_.rho[static_cast<std::size_t>(t)], w_);
    return LogWeight(k == 0 ? WeightBranch::kFirst : WeightBranch::kIntermediate, e);
  }
  // With sigma_y = 0 the exact likelihood is the same for every particle.
  e.exact_loglik = w_.sigma_y > 0.0 ? ApproxLogLik(p.x, 0.0, w_) : 0.0;
  return LogWeight(WeightBranch::kFinal, e);
}

void DdsmcModel::Propose(DdsmcParticle& p, int k, CounterRng& rng) const {
  const int t = time_at(k + 1);
  TargetEvaluation& e = p.terms;
  Require(e.approx_loglik, "approximate likelihood before proposing");
  const StepPlan& step = plan_[static_cast<std::size_t>(k)];
  TargetEvaluation next;
  next.prev_approx_loglik = e.approx_loglik;
  if (t == 0) {
    p.x = PosteriorX0(p.x0hat, step.rho_next, w_).mean;
  } else {
    const DiagGaussian proposal =
        ProposalFromPlan(p.x, p.x0hat, w_, step.kernel, step.lambda_sq, step.rho_next);
    Eigen::VectorXd x_new = proposal.Sample(rng);
    next.log_proposal = proposal.LogPdf(x_new);
    next.log_transition = DiagGaussianLogPdf(
        x_new, step.kernel.recon_coef * p.x0hat + step.kernel.state_coef * p.x,
        Eigen::VectorXd::Constant(x_new.size(), step.kernel.var));
    p.x = std::move(x_new);
  }
  e = next;
}

double DdsmcResult::MinEss() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : trace) best = std::min(best, r.ess);
  return best;
}

Eigen::MatrixXd DdsmcResult::Draw(int n, std::uint64_t seed) const {
  if (n < 0) throw ParameterError("negative draw count");
  CounterRng rng(MakeKey(seed, RandomDomain::kFinalDraw, 1));
  const std::vector<int> idx = MultinomialAncestors(weights, n, rng);
  Eigen::MatrixXd out(samples.rows(), n);
  for (int j = 0; j < n; ++j) out.col(j) = samples.col(idx[static_cast<std::size_t>(j)]);
  return out;
}

DdsmcSampler::DdsmcSampler(const ScoreModel& score, const MeasurementModel& model,
                           const Eigen::VectorXd& y, DdsmcConfig cfg)
    : cfg_(std::move(cfg)) {
  cfg_.Validate();
  model.Validate();
  if (score.dim() != model.dim_x()) throw ParameterError("score and measurement dimensions differ");
  if (y.size() != model.dim_y()) throw ParameterError("y has the wrong length");
  w_ = Whiten(model, y);
  score_w_ = score.InBasis(w_.v);
}

DdsmcResult DdsmcSampler::Run(std::uint64_t seed) const {
  const DdsmcModel model(*score_w_, w_, cfg_);
  SmcOptions opts;
  opts.num_particles = cfg_.num_particles;
  opts.seed = seed;
  SmcResult<DdsmcParticle> smc = RunSmc(model, opts);

  DdsmcResult out;
  out.samples.resize(w_.dim_x(), cfg_.num_particles);
  for (int i = 0; i < cfg_.num_particles; ++i) {
    out.samples.col(i) = w_.v * smc.particles[static_cast<std::size_t>(i)].x;
  }
  out.weights = std::move(smc.weights);
  out.trace = std::move(smc.trace);
  out.lambda_clamped_steps = model.lambda_clamped_steps();
  CounterRng rng(MakeKey(seed, RandomDomain::kFinalDraw, 0));
  out.draw = out.samples.col(MultinomialAncestors(out.weights, 1, rng)[0]);
  return out;
}

}  // namespace ddsmc
