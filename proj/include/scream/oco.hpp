#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "scream/types.hpp"

namespace scream {

/// Origin-centred Euclidean ball of the given diameter. Every decision the
/// online algorithms emit lives in one of these.
struct DomainBall {
  int dimension = 1;
  double diameter = 1.0;

  DomainBall() = default;
  DomainBall(int dim, double diam);

  double radius() const { return 0.5 * diameter; }
  bool contains(const Vector& w, double tol = 1e-12) const;
  Vector project(const Vector& x) const;
};

/// Round-t loss of online convex optimisation with memory.
///
/// `window_loss` takes the last m+1 decisions ordered oldest first
/// (w_{t-m}, ..., w_t). `unary_loss` is optional: when empty the unary value
/// is computed by feeding m+1 copies of w to `window_loss`, which makes
/// f(w,...,w) == f~(w) hold bit-for-bit.
struct MemoryLossOracle {
  int memory = 0;
  double lipschitz = 0.0;       // coordinate-wise Lipschitz constant L
  double gradient_bound = 0.0;  // G, bound on the unary gradient norm
  std::function<double(std::span<const Vector>)> window_loss;
  std::function<double(const Vector&)> unary_loss;
  std::function<Vector(const Vector&)> unary_grad;
};

/// Losses are revealed one round at a time, after the decision is submitted.
/// Rounds are numbered from 1.
using LossStream = std::function<MemoryLossOracle(int round)>;

double eval_memory_loss(const MemoryLossOracle& oracle, std::span<const Vector> window);
double eval_unary_loss(const MemoryLossOracle& oracle, const Vector& w);
Vector unary_gradient(const MemoryLossOracle& oracle, const Vector& w);

/// f(w) = 1/2 (w'x - y)^2, memoryless.
MemoryLossOracle square_loss_oracle(Vector features, double target, double gradient_bound = 0.0);

/// f(w_{t-m..t}) = 1/2 || mean(window) - target ||^2. Unary form 1/2 ||w - target||^2.
MemoryLossOracle averaged_quadratic_oracle(int memory, Vector target, double diameter);

/// f(a, b) = ||a - b||_2 for m = 1; convex with unary form identically zero.
MemoryLossOracle pairwise_distance_oracle(int dimension);

struct ComparatorSequence {
  std::vector<Vector> points;

  std::size_t size() const { return points.size(); }
  bool inside(const DomainBall& domain, double tol = 1e-12) const;
  double path_length() const;
};

struct RegretReport {
  double cumulative_loss = 0.0;
  double comparator_loss = 0.0;
  double switching_cost = 0.0;  // already multiplied by lambda
  double dynamic_policy_regret = 0.0;
  double static_policy_regret = 0.0;
  double path_length = 0.0;
};

/// Window of m+1 decisions ending at round t (1-based). Rounds before the
/// first are padded with the round-1 decision.
std::vector<Vector> decision_window(std::span<const Vector> decisions, int round, int memory);

/// Sum of ||w_t - w_{t-1}||_2 for t = 2..T.
double path_length(std::span<const Vector> points);

/// Fills a RegretReport from a played decision sequence, the comparators and
/// the oracles revealed along the way. Static regret is measured against the
/// average comparator (which equals the comparator itself when it is fixed),
/// or against `fixed_comparator` when one is given.
RegretReport regret_metrics(std::span<const Vector> decisions, const ComparatorSequence& comparators,
                            std::span<const MemoryLossOracle> oracles, double lambda,
                            const std::optional<Vector>& fixed_comparator = std::nullopt);

}  // namespace scream
