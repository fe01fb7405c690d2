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

// ddsmc command-line harness.
//
//   ddsmc gmm-bench   [flags]   seeded GMM posterior benchmark (SWD to exact posterior)
//   ddsmc prior-check [flags]   uninformative measurement: proposal grid + SWD to the prior
//   ddsmc d3smc-bench [flags]   discrete toy posterior (TV to enumeration)
//   ddsmc sample      [flags]   one problem, writes samples and a 2-D scatter file
//
// Values come from the task defaults, then --config (nested JSON), then flags.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddsmc/error.hpp"
#include "ddsmc/harness.hpp"
#include "ddsmc/parallel.hpp"

namespace {

using ddsmc::ExperimentConfig;

struct Overrides {
  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<int> d_x, d_y, num_components, particles, steps, num_timesteps;
  std::optional<double> sigma_y, lattice_scale, eta, beta_min, beta_max;
  std::optional<std::string> recon, lambda;
  std::vector<std::uint64_t> seeds;
  std::optional<int> num_samples, draws_per_run, projections;
  std::optional<std::uint64_t> metric_seed;
  std::optional<double> check_min, check_max;
  std::optional<int> d3_vars, d3_states, d3_steps;
  std::optional<double> d3_beta_y, d3_coupling, d3_field;
  bool write_samples = false;
};

struct Common {
  Overrides ov;
  bool check = false;
  int threads = 0;
};

void AddConfigFlags(CLI::App* cmd, Overrides& ov, bool discrete) {
  cmd->add_option("--config", ov.config_path, "Nested JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--output-dir", ov.output_dir, "Output directory (default $DDSMC_OUTPUT_DIR or ./results)");
  cmd->add_option("--seeds", ov.seeds, "Seeds, e.g. --seeds 0 1 2");
  cmd->add_option("--num-samples", ov.num_samples, "Output samples per seed");
  cmd->add_option("-N,--particles", ov.particles, "Particle count");
  cmd->add_flag("--write-samples", ov.write_samples, "Also write per-seed sample CSVs");
  cmd->add_option("--check-min", ov.check_min, "Lower bound on the mean metric for --check");
  cmd->add_option("--check-max", ov.check_max, "Upper bound on the mean metric for --check");
  if (discrete) {
    cmd->add_option("--vars", ov.d3_vars, "Number of discrete variables");
    cmd->add_option("--states", ov.d3_states, "States per variable");
    cmd->add_option("--steps", ov.d3_steps, "Discrete diffusion steps");
    cmd->add_option("--beta-y", ov.d3_beta_y, "Measurement channel mixing (1 = uninformative)");
    cmd->add_option("--coupling", ov.d3_coupling, "Chain prior coupling");
    cmd->add_option("--field", ov.d3_field, "Chain prior field on the first variable");
    return;
  }
  cmd->add_option("--d-x", ov.d_x, "Latent dimension");
  cmd->add_option("--d-y", ov.d_y, "Measurement dimension");
  cmd->add_option("--sigma-y", ov.sigma_y, "Measurement noise std");
  cmd->add_option("--components", ov.num_components, "Mixture components (perfect square)");
  cmd->add_option("--lattice-scale", ov.lattice_scale, "Lattice spacing of mixture means");
  cmd->add_option("--eta", ov.eta, "Inverse temperature in [0, 1]");
  cmd->add_option("--recon", ov.recon, "tweedie | ode | ode:K");
  cmd->add_option("--steps", ov.steps, "Generation steps");
  cmd->add_option("--lambda", ov.lambda, "matched | daps");
  cmd->add_option("--T", ov.num_timesteps, "Diffusion timesteps");
  cmd->add_option("--beta-min", ov.beta_min, "VP beta at t = 1");
  cmd->add_option("--beta-max", ov.beta_max, "VP beta at t = T");
  cmd->add_option("--draws-per-run", ov.draws_per_run, "Draws per SMC run (0 = N)");
  cmd->add_option("--projections", ov.projections, "SWD projections");
  cmd->add_option("--metric-seed", ov.metric_seed, "SWD projection seed");
}

template <typename T, typename U>
void Set(const std::optional<T>& from, U& to) {
  if (from) to = *from;
}

ExperimentConfig Resolve(ddsmc::Task task, const Overrides& ov) {
  ExperimentConfig cfg = ExperimentConfig::ForTask(task);
  if (!ov.config_path.empty()) {
    cfg.ApplyFile(ov.config_path);
    cfg.task = task;
  }
  Set(ov.output_dir, cfg.output_dir);
  Set(ov.d_x, cfg.d_x);
  Set(ov.d_y, cfg.d_y);
  Set(ov.sigma_y, cfg.sigma_y);
  Set(ov.num_components, cfg.num_components);
  Set(ov.lattice_scale, cfg.lattice_scale);
  Set(ov.eta, cfg.eta);
  if (ov.recon) cfg.recon = ddsmc::ParseReconstruction(*ov.recon);
  if (ov.lambda) cfg.lambda_mode = ddsmc::ParseLambdaMode(*ov.lambda);
  Set(ov.particles, cfg.num_particles);
  Set(ov.steps, cfg.steps);
  Set(ov.num_timesteps, cfg.num_timesteps);
  Set(ov.beta_min, cfg.beta_min);
  Set(ov.beta_max, cfg.beta_max);
  if (!ov.seeds.empty()) cfg.seeds = ov.seeds;
  Set(ov.num_samples, cfg.num_samples);
  Set(ov.draws_per_run, cfg.draws_per_run);
  if (ov.write_samples) cfg.write_samples = true;
  Set(ov.projections, cfg.swd_projections);
  Set(ov.metric_seed, cfg.metric_seed);
  Set(ov.check_min, cfg.check_min);
  Set(ov.check_max, cfg.check_max);
  Set(ov.d3_vars, cfg.d3_vars);
  Set(ov.d3_states, cfg.d3_states);
  Set(ov.d3_steps, cfg.d3_steps);
  Set(ov.d3_beta_y, cfg.d3_beta_y);
  Set(ov.d3_coupling, cfg.d3_coupling);
  Set(ov.d3_field, cfg.d3_field);
  cfg.Validate();
  return cfg;
}

void WarnOnClamping(const ExperimentConfig& cfg) {
  if (cfg.task == ddsmc::Task::kD3smc) return;
  const ddsmc::DdsmcConfig sc = ddsmc::MakeSamplerConfig(cfg);
  int clamped = 0;
  for (int t : sc.sched.times()) {
    if (t == 0 || t == sc.sched.times().front()) continue;
    if (ddsmc::ComputeLambdaSq(t, sc.eta, sc.sched, sc.rho, sc.lambda_mode).clamped) ++clamped;
  }
  if (clamped > 0) {
    std::fprintf(stderr,
                 "warning: lambda^2 clamped to 0 at %d of %d steps (eta=%g); the proposal is "
                 "wider than the prior transition there\n",
                 clamped, static_cast<int>(sc.sched.times().size()) - 1, cfg.eta);
  }
}

// Mean metric against the configured band; returns the exit code.
int RunBench(const ExperimentConfig& cfg, bool check) {
  WarnOnClamping(cfg);
  const char* metric = cfg.task == ddsmc::Task::kD3smc ? "tv" : "swd";
  const ddsmc::BenchmarkSummary summary =
      ddsmc::RunBenchmark(cfg, [&](const ddsmc::ResultRow& row, bool resumed) {
        std::printf("seed %-4llu %s=%.4f ess_min=%.1f %s\n",
                    static_cast<unsigned long long>(row.seed), metric, row.value, row.ess_min,
                    resumed ? "(resumed)" : "");
        std::fflush(stdout);
      });
  const double mean = summary.MeanValue();
  std::printf("%s: mean %s over %zu seeds = %.4f  [%s]\n", ddsmc::ToString(cfg.task).c_str(),
              metric, summary.rows.size(), mean, summary.csv_path.string().c_str());
  std::fflush(stdout);
  if (!check) return 0;
  bool ok = true;
  if (cfg.check_min && !(mean >= *cfg.check_min)) ok = false;
  if (cfg.check_max && !(mean <= *cfg.check_max)) ok = false;
  if (!ok) {
    std::fprintf(stderr, "check failed: mean %s %.4f outside [%s, %s]\n", metric, mean,
                 cfg.check_min ? std::to_string(*cfg.check_min).c_str() : "-inf",
                 cfg.check_max ? std::to_string(*cfg.check_max).c_str() : "inf");
    return 1;
  }
  std::printf("check passed\n");
  return 0;
}

int RunPriorCheck(const ExperimentConfig& cfg, bool check) {
  const std::vector<double> etas = {0.0, 0.25, 0.5, 0.75, 1.0};
  const ddsmc::PriorMatchReport match =
      ddsmc::CheckProposalMatchesPrior(cfg, etas, cfg.seeds.front());
  std::printf("proposal vs prior transition: max rel error %.3g over %d points (%d clamped, skipped)\n",
              match.max_rel_error, match.checked, match.clamped);
  const bool grid_ok = match.max_rel_error <= 1e-3;
  const int bench = RunBench(cfg, check);
  if (check && !grid_ok) {
    std::fprintf(stderr, "check failed: proposal mismatch %.3g > 1e-3\n", match.max_rel_error);
    return 1;
  }
  return bench;
}

int RunSample(const ExperimentConfig& cfg, std::uint64_t seed, int dim_i, int dim_j) {
  WarnOnClamping(cfg);
  const ddsmc::GmmSeedOutput out = ddsmc::RunGmmSeed(cfg, seed);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string stem = cfg.Tag() + "_seed" + std::to_string(seed);
  ddsmc::WriteSamplesCsv(out.samples, cfg.output_dir / (stem + ".samples.csv"));
  ddsmc::ExportScatter(out.samples, dim_i, dim_j, cfg.output_dir / (stem + ".scatter.txt"));
  ddsmc::ExportScatter(out.reference, dim_i, dim_j, cfg.output_dir / (stem + ".reference.txt"));
  ddsmc::SaveProblem(out.problem, cfg.output_dir / (stem + ".problem.json"));
  std::printf("seed %llu: %d samples from %d runs, swd=%.4f, ess_min=%.1f -> %s\n",
              static_cast<unsigned long long>(seed), cfg.num_samples, out.runs, out.swd,
              out.ess_min, (cfg.output_dir / stem).string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-prior sequential Monte Carlo benchmarks"};
  app.require_subcommand(1);

  Common gmm, prior, d3, sample;
  std::uint64_t sample_seed = 0;
  std::vector<int> dims = {0, 1};
  bool sample_prior = false;

  auto* gmm_cmd = app.add_subcommand("gmm-bench", "GMM posterior benchmark");
  auto* prior_cmd = app.add_subcommand("prior-check", "Prior recovery with an uninformative measurement");
  auto* d3_cmd = app.add_subcommand("d3smc-bench", "Discrete toy posterior benchmark");
  auto* sample_cmd = app.add_subcommand("sample", "Sample one GMM problem and export scatter data");

  for (auto [cmd, common, discrete] : {std::tuple{gmm_cmd, &gmm, false},
                                       std::tuple{prior_cmd, &prior, false},
                                       std::tuple{d3_cmd, &d3, true},
                                       std::tuple{sample_cmd, &sample, false}}) {
    AddConfigFlags(cmd, common->ov, discrete);
    cmd->add_option("--threads", common->threads, "Worker threads (0 = all cores)");
    if (cmd != sample_cmd) {
      cmd->add_flag("--check", common->check, "Exit nonzero when the acceptance band is missed");
    }
  }
  sample_cmd->add_option("--seed", sample_seed, "Problem seed");
  sample_cmd->add_option("--dims", dims, "Scatter coordinates i j")->expected(2);
  sample_cmd->add_flag("--prior", sample_prior, "Uninformative measurement; reference is the prior");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gmm_cmd) {
      const ddsmc::ThreadLimit limit(gmm.threads);
      return RunBench(Resolve(ddsmc::Task::kGmm, gmm.ov), gmm.check);
    }
    if (*prior_cmd) {
      const ddsmc::ThreadLimit limit(prior.threads);
      return RunPriorCheck(Resolve(ddsmc::Task::kPriorRecovery, prior.ov), prior.check);
    }
    if (*d3_cmd) {
      const ddsmc::ThreadLimit limit(d3.threads);
      return RunBench(Resolve(ddsmc::Task::kD3smc, d3.ov), d3.check);
    }
    const ddsmc::ThreadLimit limit(sample.threads);
    return RunSample(
        Resolve(sample_prior ? ddsmc::Task::kPriorRecovery : ddsmc::Task::kGmm, sample.ov),
        sample_seed, dims[0], dims[1]);
  } catch (const ddsmc::ParameterError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
