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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ddsmc/ddsmc.hpp"
#include "ddsmc/diffusion.hpp"
#include "ddsmc/discrete.hpp"
#include "ddsmc/gmm.hpp"
#include "ddsmc/metrics.hpp"

namespace ddsmc {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kOutputDirEnv = "DDSMC_OUTPUT_DIR";

enum class Task { kGmm, kPriorRecovery, kD3smc };

std::string ToString(Task task);
Task ParseTask(const std::string& text);
// "tweedie", "ode" (every remaining step) or "ode:K".
Reconstruction ParseReconstruction(const std::string& text);
std::string ReconstructionTag(const Reconstruction& recon);
LambdaMode ParseLambdaMode(const std::string& text);
std::string ToString(LambdaMode mode);

struct ExperimentConfig {
  Task task = Task::kGmm;

  // Problem.
  int d_x = 8;
  int d_y = 4;
  double sigma_y = 1.0;
  int num_components = 25;
  double lattice_scale = 8.0;

  // Sampler.
  double eta = 1.0;
  Reconstruction recon = Reconstruction::Tweedie();
  int num_particles = 256;
  int steps = 20;
  LambdaMode lambda_mode = LambdaMode::kMatched;

  // VP schedule.
  int num_timesteps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;

  // Runs.
  std::vector<std::uint64_t> seeds = DefaultSeeds();
  int num_samples = 10000;  // output samples per seed
  int draws_per_run = 0;    // multinomial draws per SMC run; 0 means N
  bool write_samples = false;

  // Discrete task.
  int d3_vars = 4;
  int d3_states = 3;
  int d3_steps = 100;
  double d3_beta_y = 0.6;
  double d3_coupling = 1.5;
  double d3_field = 0.5;

  // Metric.
  int swd_projections = kDefaultProjections;
  std::uint64_t metric_seed = kDefaultMetricSeed;

  // Acceptance band for --check on the mean metric over seeds.
  std::optional<double> check_min;
  std::optional<double> check_max;

  std::filesystem::path output_dir = DefaultOutputDir();

  static std::vector<std::uint64_t> DefaultSeeds();
  // $DDSMC_OUTPUT_DIR when set, otherwise ./results.
  static std::filesystem::path DefaultOutputDir();
  // Task defaults (prior recovery uses sigma_y = 1e6 and a 0.15 check bound, ...).
  static ExperimentConfig ForTask(Task task);

  // Overrides fields from a nested JSON document such as
  //   {"problem": {"d_x": 8}, "sampler": {"eta": 0.5, "recon": "ode"}, "run": {"seeds": [0, 1]}}.
  // Unknown keys are rejected; a top-level "notes" object is ignored.
  void ApplyJson(const std::string& text);
  void ApplyFile(const std::filesystem::path& path);
  std::string ToJson() const;

  void Validate() const;
  // File stem shared by the CSV, sidecar and sample files of this config.
  std::string Tag() const;
  int EffectiveDrawsPerRun() const { return draws_per_run > 0 ? draws_per_run : num_particles; }
};

struct ResultRow {
  std::uint64_t seed = 0;
  Task task = Task::kGmm;
  int d_x = 0;
  int d_y = 0;
  double eta = 0.0;
  std::string recon;
  int num_particles = 0;
  int steps = 0;
  int num_samples = 0;
  std::string metric;  // "swd" or "tv"
  double value = 0.0;
  double ess_min = 0.0;
  int projections = 0;
  std::uint64_t metric_seed = 0;
  double wall_ms = 0.0;
};

std::string CsvHeader();
std::string FormatRow(const ResultRow& row);
ResultRow ParseRow(const std::string& line);
// Shortest round-trippable form with 17 significant digits.
std::string FormatDouble(double value);

// One seed of the continuous pipeline.
struct GmmSeedOutput {
  GmmProblem problem;
  Eigen::MatrixXd samples;    // d_x x num_samples
  Eigen::MatrixXd reference;  // exact posterior (or prior) draws
  double swd = 0.0;
  double ess_min = 0.0;
  int runs = 0;
  int lambda_clamped_steps = 0;
};

struct D3smcSeedOutput {
  DiscreteState y;
  Eigen::VectorXd histogram;  // aggregate weighted empirical law
  Eigen::VectorXd reference;  // enumeration posterior
  std::vector<DiscreteState> samples;  // first run's ensemble, for export
  std::vector<double> sample_weights;
  double tv = 0.0;
  double ess_min = 0.0;
  int runs = 0;
};

NoiseSchedule MakeSchedule(const ExperimentConfig& cfg);
DdsmcConfig MakeSamplerConfig(const ExperimentConfig& cfg);
GmmSeedOutput RunGmmSeed(const ExperimentConfig& cfg, std::uint64_t seed);
D3smcSeedOutput RunD3smcSeed(const ExperimentConfig& cfg, std::uint64_t seed);
ResultRow RunSeed(const ExperimentConfig& cfg, std::uint64_t seed);

// Largest relative gap between the proposal and the prior transition over
// every generation time t > 0 and each eta, at the config's sigma_y. Points
// whose lambda^2 was clamped cannot match and are only counted.
struct PriorMatchReport {
  double max_rel_error = 0.0;
  int checked = 0;
  int clamped = 0;
};

PriorMatchReport CheckProposalMatchesPrior(const ExperimentConfig& cfg,
                                           const std::vector<double>& etas, std::uint64_t seed);

struct BenchmarkSummary {
  std::vector<ResultRow> rows;  // rows for cfg.seeds, in order
  std::filesystem::path csv_path;
  int resumed = 0;              // seeds taken from an existing CSV
  double MeanValue() const;
};

using ProgressFn = std::function<void(const ResultRow&, bool resumed)>;

// Runs every seed, appending one CSV row per seed as soon as it finishes.
// Seeds already present in an existing CSV with the same header are skipped.
// Also writes <tag>.config.json next to the CSV.
BenchmarkSummary RunBenchmark(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// Two-column text file of coordinates (i, j), one sample (column) per row.
void ExportScatter(const Eigen::MatrixXd& samples, int dim_i, int dim_j,
                   const std::filesystem::path& path);
Eigen::MatrixXd ReadScatter(const std::filesystem::path& path);

// Comma-separated samples, one per row, header x0..x{d-1}.
void WriteSamplesCsv(const Eigen::MatrixXd& samples, const std::filesystem::path& path);
void WriteDiscreteSamplesCsv(const std::vector<DiscreteState>& samples,
                             const std::vector<double>& weights, const std::filesystem::path& path);

}  // namespace ddsmc
