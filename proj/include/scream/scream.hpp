#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scream/oco.hpp"
#include "scream/omd.hpp"
#include "scream/types.hpp"

namespace scream {

/// Geometric grid of OGD step sizes, eta_i = 2^{i-1} eta_1 for i = 1..N.
struct StepSizePool {
  std::vector<double> steps;

  int size() const { return static_cast<int>(steps.size()); }
  double operator[](int i) const { return steps[static_cast<std::size_t>(i)]; }
};

/// N = ceil(log2(1 + T) / 2) + 1.
int pool_size(long horizon);

/// eta_1 = sqrt(D^2 / ((lambda G + G^2) T)), doubled N - 1 times.
StepSizePool build_step_size_pool(long horizon, double diameter, double gradient_bound,
                                  double lambda);

/// p_i = (N + 1) / (N i (i + 1)).
Vector nonuniform_prior(int n);
Vector uniform_prior(int n);

struct ScreamConfig {
  long horizon = 1;
  int dimension = 1;
  int memory = 0;
  double lipschitz = 0.0;
  double gradient_bound = 1.0;
  double diameter = 1.0;
  std::optional<double> lambda_override;  // replaces m^2 L when set

  double lambda() const;
  double meta_rate() const;
  StepSizePool pool() const;
  DomainBall domain() const { return DomainBall(dimension, diameter); }
};

/// Everything the meta-expert engine needs: the expert step sizes, the prior,
/// the Hedge rate and the movement weight inside the meta loss.
struct MetaSpec {
  StepSizePool pool;
  Vector prior;
  double meta_rate = 0.0;
  double meta_lambda = 0.0;
};

MetaSpec scream_spec(const ScreamConfig& config);

/// Same structure with no movement term in the meta loss, a uniform prior and
/// eps = sqrt(8 ln N / ((G D)^2 T)).
MetaSpec ader_spec(const ScreamConfig& config);

/// l_i = <g, w_i> + lambda ||w_i - w_i^prev||.
Vector surrogate_loss(const std::vector<Vector>& experts, const std::vector<Vector>& previous,
                      const Vector& gradient, double lambda);

struct ScreamState {
  std::vector<Vector> experts;
  std::vector<Vector> previous;
  Vector weights;
  int round = 0;  // rounds completed

  static ScreamState start(const MetaSpec& spec, const Vector& origin);

  /// w = sum_i p_i w_i.
  Vector aggregate() const;
};

struct RoundRecord {
  Vector decision;
  Vector losses;
  double weight_movement = 0.0;  // ||p_{t+1} - p_t||_1
};

using Projector = std::function<Vector(const Vector&)>;

/// Feeds the round's single gradient (taken at the aggregated decision) to the
/// meta learner and to every expert. In the first round the experts have no
/// previous decision and the movement term is zero.
RoundRecord meta_expert_update(ScreamState& state, const MetaSpec& spec, const Vector& gradient,
                               const Projector& project);

/// One full round: submit the aggregate, take the oracle gradient once, update.
RoundRecord scream_round(ScreamState& state, const MetaSpec& spec, const DomainBall& domain,
                         const MemoryLossOracle& oracle);

struct OnlineRun {
  std::string algorithm;
  double lambda = 0.0;
  std::vector<Vector> decisions;
  std::vector<double> losses;     // f_t on the memory window
  std::vector<double> switching;  // lambda ||w_t - w_{t-1}||, zero at t = 1
  std::vector<double> gradient_norms;
  // Meta learner diagnostics; empty for plain OGD.
  double meta_rate = 0.0;
  std::vector<double> weight_movement;
  std::vector<double> loss_sup;  // max_i |l_{t,i}|
  std::vector<Vector> weights;   // filled only when requested
  double step_size = 0.0;        // OGD only
  RegretReport report;

  double overall_loss() const { return report.cumulative_loss + report.switching_cost; }
};

struct RunOptions {
  bool record_weights = false;
  std::optional<Vector> fixed_comparator;
};

OnlineRun run_meta_expert(const std::string& name, const ScreamConfig& config, const MetaSpec& spec,
                          const LossStream& stream, const ComparatorSequence& comparators,
                          const RunOptions& options = {});

OnlineRun run_scream(const ScreamConfig& config, const LossStream& stream,
                     const ComparatorSequence& comparators, const RunOptions& options = {});
OnlineRun run_ader(const ScreamConfig& config, const LossStream& stream,
                   const ComparatorSequence& comparators, const RunOptions& options = {});

/// eta = sqrt(2 D^2 / ((G^2 + lambda G) T)).
double ogd_memory_step(const ScreamConfig& config);

OnlineRun run_ogd_memory(const ScreamConfig& config, const LossStream& stream,
                         const ComparatorSequence& comparators,
                         std::optional<double> step = std::nullopt, const RunOptions& options = {});

}  // namespace scream
