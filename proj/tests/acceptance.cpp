#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <set>
#include <string>
#include <thread>

#include "scream/bench.hpp"
#include "scream/verify.hpp"

using namespace scream;

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };

  ExperimentConfig config;
  config.per_round = false;
  config.workers = worker_count_from_env(
      static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));

  int failed = 0;
  auto emit = [&](const CriterionResult& r, std::chrono::steady_clock::time_point start) {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << format_result(r) << " (" << static_cast<int>(s + 0.5) << " s)" << std::endl;
    if (!r.passed) ++failed;
  };

  BenchmarkResult oco, control;
  if (wanted(1) || wanted(5)) {
    const auto start = std::chrono::steady_clock::now();
    oco = run_oco_benchmark(config, false);
    if (wanted(1)) emit(check_benchmark_orderings(oco), start);
  }
  if (wanted(2)) {
    const auto start = std::chrono::steady_clock::now();
    emit(check_transfer_equivalence(), start);
  }
  if (wanted(3)) {
    const auto start = std::chrono::steady_clock::now();
    emit(check_truncation_bounds(), start);
  }
  if (wanted(4)) {
    const auto start = std::chrono::steady_clock::now();
    emit(check_gradients(), start);
  }
  if (wanted(5)) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig c = config;
    c.algorithms = {"ogd", "ader", "scream"};
    control = run_control_benchmark(c, false);
    emit(check_movement_bounds({&oco, &control}), start);
  }
  if (wanted(6)) {
    const auto start = std::chrono::steady_clock::now();
    emit(check_regret_scaling(config), start);
  }
  if (wanted(7)) {
    const auto start = std::chrono::steady_clock::now();
    emit(check_identification(config), start);
  }
  if (wanted(8)) {
    const auto start = std::chrono::steady_clock::now();
    emit(check_structural(), start);
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
