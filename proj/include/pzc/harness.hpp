#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pzc/transforms.hpp"

namespace pzc {

enum class SolverKind { Sgd, Spider, Walker };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

struct SolverSettings {
  SolverKind kind = SolverKind::Sgd;
  double step = 0.0;        // sgd; 0 = auto (budget rule)
  double step_coeff = 0.0;  // sgd; > 0 selects step = step_coeff * eps^2 / sigma^2
  double step_norm = 0.0;   // spider; 0 = auto
  int epoch_length = 0;     // spider; 0 = auto
  int restart_rounds = 0;   // spider; 0 = auto
  int max_rounds = 100000;
};

// One experiment: an instance spec, a solver, an accuracy grid and a trial
// budget. Round-trips losslessly through the flat text form.
struct ExperimentManifest {
  InstanceSpec instance;
  SolverSettings solver;
  std::vector<double> eps_grid;  // strictly decreasing
  int trials = 1;
  std::uint64_t master_seed = 1;
  std::string output_path = "results.csv";
};

std::string serialize_manifest(const ExperimentManifest& manifest);
ExperimentManifest parse_manifest(const std::string& text);
ExperimentManifest load_manifest_file(const std::string& path);

// Ordinary least squares on (log 1/eps, log queries) points.
struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::vector<std::pair<double, double>> points;
};

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

struct TrialRow {
  double eps = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::int64_t queries = 0;  // rounds * K, censored at the budget
  double final_grad_norm = 0.0;
  bool censored = false;
  int rounds = 0;
  double lower_bound_rounds = 0.0;  // (T-1)/(2p) of the instance
};

struct SweepResult {
  std::vector<TrialRow> rows;
  ScalingFit fit;
  std::vector<double> median_queries;  // one per grid point
  int censored_total = 0;
  double seconds = 0.0;
};

// Executes the grid (or just its first point for run_single). Trials take
// derived seeds and run concurrently; results are ordered, so output files
// are byte-identical across reruns of the same manifest.
SweepResult run_sweep(const ExperimentManifest& manifest);
SweepResult run_single(const ExperimentManifest& manifest);

// CSV rows (eps, trial, seed, queries, final_grad_norm), %.17g floats.
std::string results_csv(const SweepResult& result);

// Human+machine summary: fit, medians, censoring, runtime, code version,
// and the full manifest embedded for replay.
std::string results_summary(const SweepResult& result,
                            const ExperimentManifest& manifest);

// Writes output_path and output_path + ".summary".
void write_results(const SweepResult& result,
                   const ExperimentManifest& manifest);

const char* version_string();

}  // namespace pzc
