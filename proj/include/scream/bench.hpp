#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scream/csv.hpp"
#include "scream/oco.hpp"
#include "scream/scream.hpp"
#include "scream/scream_control.hpp"
#include "scream/sysid.hpp"

namespace scream {

struct ExperimentConfig {
  // Online regression with switching cost.
  std::string scenario = "piecewise-regression";
  long T = 20000;
  int d = 10;
  int period = 2000;
  double Gamma = 1.0;  // bound on ||x_t||
  double D = 2.0;      // diameter of the decision ball
  double G = 2.0;      // gradient bound, D Gamma^2
  double noise = 0.1;  // label noise uniform on [0, noise]
  double feature_radius = 0.5;
  double comparator_radius = 1.0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<std::string> algorithms = {"ogd", "ader", "scream"};
  std::vector<double> alphas = {0.1, 0.5, 1.0};

  // Control.
  std::string preset = "tracking";
  long control_T = 4000;
  int segments = 5;
  double target_radius = 1.0;
  double rho = 0.1;
  double lambda_multiplier = 1.0;
  std::optional<int> H;

  // Identification.
  std::string sysid_preset = "stable3x2";
  std::vector<long> T0_grid = {1000, 4000, 16000, 64000};
  int sysid_seeds = 20;
  int k = 0;  // 0 picks the controllability index

  std::filesystem::path output_dir = "results";
  bool per_round = true;
  bool timing = false;
  int workers = 1;
};

/// Flat "key = value" text; '#' starts a comment; lists are comma separated.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
std::vector<double> parse_double_list(const std::string& text);
std::vector<std::string> parse_string_list(const std::string& text);

/// Worker count from SCREAM_BENCH_WORKERS, else `fallback`.
int worker_count_from_env(int fallback);

struct RegressionStream {
  std::vector<Vector> features;
  std::vector<double> labels;
  ComparatorSequence comparators;
  double gradient_bound = 2.0;

  LossStream stream() const;
  int segment_jumps() const;
};

/// Features uniform in the ball of radius feature_radius, labels
/// x't w*_t + eps_t with eps_t uniform on [0, noise], and w*_t redrawn
/// uniformly in the ball of radius comparator_radius every `period` rounds.
RegressionStream gen_piecewise_regression(const ExperimentConfig& config, std::uint64_t seed);

ScreamConfig regression_scream_config(const ExperimentConfig& config, double alpha);

struct MovementAudit {
  std::string cell;
  double worst_hedge_excess = 0.0;  // max_t ||dp||_1 - eps max|l|
  double ogd_switching = 0.0;       // sum ||w_t - w_{t-1}||
  double ogd_bound = 0.0;           // eta G T
};

struct CellFailure {
  std::string cell;
  std::string message;
};

struct SummaryRow {
  std::string scenario;
  std::string algorithm;
  double alpha = 0.0;
  int runs = 0;
  double overall_mean = 0.0, overall_std = 0.0;
  double cumulative_mean = 0.0, cumulative_std = 0.0;
  double switching_mean = 0.0, switching_std = 0.0;
  double regret_mean = 0.0, regret_std = 0.0;
};

struct BenchmarkResult {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<MovementAudit> audits;
  std::vector<CellFailure> failures;
};

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
std::string summary_csv_string(const std::vector<SummaryRow>& summary);
const SummaryRow* find_summary(const std::vector<SummaryRow>& summary, const std::string& algorithm,
                               double alpha);

/// Runs every (algorithm, alpha, seed) cell. Writes files when `write` is set.
BenchmarkResult run_oco_benchmark(const ExperimentConfig& config, bool write);

/// Tracking control benchmark on the configured preset: ogd and scream DAC
/// controllers against per-segment best fixed DAC policies.
BenchmarkResult run_control_benchmark(const ExperimentConfig& config, bool write);

struct TrackingInstance {
  ScenarioPreset preset;
  TrackingTask task;
  ControlConfig config;
};

TrackingInstance make_tracking_instance(const ExperimentConfig& config, long horizon,
                                        std::uint64_t seed);

struct ControlOutcome {
  ControlRun run;
  RegretReport report;
  double ogd_step = 0.0;  // set for "ogd"
};

/// Runs one controller ("scream" or "ogd") on a tracking instance and scores
/// it against per-segment comparators.
ControlOutcome run_tracking(const TrackingInstance& instance, const std::string& algorithm,
                            int segments, std::uint64_t seed);

struct IdentificationPoint {
  long T0 = 0;
  std::vector<double> errors_A;
  std::vector<double> errors_B;
  std::vector<std::vector<double>> moment_errors;  // [seed][j]
  double median_A = 0.0;
  double median_B = 0.0;
};

struct IdentificationStudy {
  int k = 0;
  std::vector<IdentificationPoint> points;
  double slope = 0.0;  // least-squares slope of log median error vs log T0
};

IdentificationStudy run_identification_study(const ExperimentConfig& config);
std::string identification_report_json(const IdentificationStudy& study);

double median(std::vector<double> values);
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// D-Regret_T / sqrt(T (1 + P_T)) for Scream on the regression task with S
/// segments, with the regret measured as overall loss minus the comparators'
/// cumulative loss.
double oco_regret_ratio(const ExperimentConfig& base, long T, int segments, double alpha,
                        std::uint64_t seed);

/// Same ratio for Scream.Control on the tracking task.
double control_regret_ratio(const ExperimentConfig& base, long T, int segments,
                            std::uint64_t seed);

std::string run_metadata_json(const ExperimentConfig& config, const std::string& command);

}  // namespace scream
