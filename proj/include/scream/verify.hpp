#pragma once

#include <string>
#include <vector>

#include "scream/bench.hpp"

namespace scream {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Ordering of mean overall loss across algorithms and the Ader/Scream
/// switching ratio on a finished regression benchmark.
CriterionResult check_benchmark_orderings(const BenchmarkResult& result);

/// Transfer-matrix state against a direct rollout of the closed loop.
CriterionResult check_transfer_equivalence(int systems = 50);

/// State and loss truncation gaps against their bounds on every preset.
CriterionResult check_truncation_bounds();

/// Analytic unary gradient against central differences.
CriterionResult check_gradients(int instances = 100);

/// Hedge step movement and OGD switching bounds on finished benchmarks.
CriterionResult check_movement_bounds(const std::vector<const BenchmarkResult*>& results);

/// Growth of D-Regret / sqrt(T (1 + P_T)) over T in {2000, 8000, 32000}.
CriterionResult check_regret_scaling(const ExperimentConfig& base, int seeds = 10);

/// Identification error slope and bit-identical phase 2 under model injection.
CriterionResult check_identification(const ExperimentConfig& base);

/// Randomized sweeps over simplex, projection, switching-cost, prior and
/// gradient-count invariants.
CriterionResult check_structural(int cases = 1000);

std::string format_result(const CriterionResult& result);

}  // namespace scream
