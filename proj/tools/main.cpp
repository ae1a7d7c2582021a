#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "scream/bench.hpp"
#include "scream/csv.hpp"
#include "scream/verify.hpp"

using namespace scream;

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string algorithms;
  std::string alphas;
  std::optional<int> workers;
  bool no_per_round = false;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "flat key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seeds, "seed to run; repeat for several");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--algorithms", f.algorithms, "comma list from ogd,ader,scream");
  cmd->add_option("--alpha", f.alphas, "comma list of lambda / G ratios");
  cmd->add_option("--workers", f.workers, "worker threads (default SCREAM_BENCH_WORKERS or 1)");
  cmd->add_flag("--no-per-round", f.no_per_round, "skip per-round CSV files");
  cmd->add_flag("--timing", f.timing, "record wall time per cell");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) c = load_config(f.config, c);
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (!f.out.empty()) c.output_dir = f.out;
  if (!f.algorithms.empty()) c.algorithms = parse_string_list(f.algorithms);
  if (!f.alphas.empty()) c.alphas = parse_double_list(f.alphas);
  c.workers = f.workers.value_or(worker_count_from_env(c.workers));
  if (f.no_per_round) c.per_round = false;
  if (f.timing) c.timing = true;
  return c;
}

void print_summary(const BenchmarkResult& r) {
  std::printf("%-22s %-8s %6s %14s %14s %14s\n", "scenario", "algo", "alpha", "overall", "switching",
              "regret");
  for (const SummaryRow& s : r.summary) {
    std::printf("%-22s %-8s %6.3g %7.2f+-%-6.2f %7.2f+-%-6.2f %7.2f+-%-6.2f\n", s.scenario.c_str(),
                s.algorithm.c_str(), s.alpha, s.overall_mean, s.overall_std, s.switching_mean,
                s.switching_std, s.regret_mean, s.regret_std);
  }
  for (const CellFailure& f : r.failures)
    std::fprintf(stderr, "cell failed: %s: %s\n", f.cell.c_str(), f.message.c_str());
}

int finish(const BenchmarkResult& r, const ExperimentConfig& c) {
  print_summary(r);
  std::cout << "results in " << c.output_dir.string() << "\n";
  return r.failures.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online learning with switching costs: benchmarks and checks"};
  app.require_subcommand(1);

  CommonFlags oco_flags, control_flags, sysid_flags;
  CLI::App* oco = app.add_subcommand("oco-bench", "piecewise-stationary regression benchmark");
  add_common(oco, oco_flags);
  CLI::App* control = app.add_subcommand("control-bench", "tracking control benchmark");
  add_common(control, control_flags);
  double multiplier = -1.0;
  control->add_option("--lambda-multiplier", multiplier, "scale applied to the theoretical lambda");
  CLI::App* sysid = app.add_subcommand("sysid-bench", "identification error versus exploration length");
  add_common(sysid, sysid_flags);
  CLI::App* verify = app.add_subcommand("verify", "run the property and oracle checks");
  std::vector<int> criteria;
  verify->add_option("--criterion", criteria, "criterion number 1-8; repeat for several");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*oco) {
      const ExperimentConfig c = resolve(oco_flags);
      return finish(run_oco_benchmark(c, true), c);
    }
    if (*control) {
      ExperimentConfig c = resolve(control_flags);
      if (multiplier >= 0.0) c.lambda_multiplier = multiplier;
      return finish(run_control_benchmark(c, true), c);
    }
    if (*sysid) {
      const ExperimentConfig c = resolve(sysid_flags);
      const IdentificationStudy study = run_identification_study(c);
      write_text_file(c.output_dir / "identification.json", identification_report_json(study));
      std::printf("k = %d\n%10s %14s %14s\n", study.k, "T0", "median |dA|", "median |dB|");
      for (const IdentificationPoint& p : study.points)
        std::printf("%10ld %14.6g %14.6g\n", p.T0, p.median_A, p.median_B);
      std::printf("log-log slope %.4f\nresults in %s\n", study.slope, c.output_dir.string().c_str());
      return 0;
    }
    if (*verify) {
      auto wanted = [&](int id) {
        return criteria.empty() || std::find(criteria.begin(), criteria.end(), id) != criteria.end();
      };
      ExperimentConfig c;
      c.per_round = false;
      c.workers = worker_count_from_env(
          static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
      std::vector<CriterionResult> results;
      BenchmarkResult oco_run, control_run;
      if (wanted(1) || wanted(5)) oco_run = run_oco_benchmark(c, false);
      if (wanted(1)) results.push_back(check_benchmark_orderings(oco_run));
      if (wanted(2)) results.push_back(check_transfer_equivalence());
      if (wanted(3)) results.push_back(check_truncation_bounds());
      if (wanted(4)) results.push_back(check_gradients());
      if (wanted(5)) {
        control_run = run_control_benchmark(c, false);
        results.push_back(check_movement_bounds({&oco_run, &control_run}));
      }
      if (wanted(6)) results.push_back(check_regret_scaling(c));
      if (wanted(7)) results.push_back(check_identification(c));
      if (wanted(8)) results.push_back(check_structural());
      bool ok = true;
      for (const CriterionResult& r : results) {
        std::cout << format_result(r) << std::endl;
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
