#include "scream/oco.hpp"

#include <cmath>

#include "scream/omd.hpp"

namespace scream {

DomainBall::DomainBall(int dim, double diam) : dimension(dim), diameter(diam) {
  SCREAM_REQUIRE(dim > 0, "dimension must be positive");
  SCREAM_REQUIRE(diam > 0.0, "diameter must be positive");
}

bool DomainBall::contains(const Vector& w, double tol) const {
  return w.size() == dimension && w.allFinite() && w.norm() <= radius() * (1.0 + tol) + tol;
}

Vector DomainBall::project(const Vector& x) const {
  SCREAM_REQUIRE(x.size() == dimension, "dimension mismatch");
  return project_to_ball(x, radius());
}

double eval_memory_loss(const MemoryLossOracle& oracle, std::span<const Vector> window) {
  SCREAM_REQUIRE(static_cast<int>(window.size()) == oracle.memory + 1,
                 "window must hold exactly m+1 decisions");
  SCREAM_REQUIRE(static_cast<bool>(oracle.window_loss), "oracle has no window loss");
  return oracle.window_loss(window);
}

double eval_unary_loss(const MemoryLossOracle& oracle, const Vector& w) {
  if (oracle.unary_loss) return oracle.unary_loss(w);
  const std::vector<Vector> copies(static_cast<std::size_t>(oracle.memory + 1), w);
  return eval_memory_loss(oracle, copies);
}

Vector unary_gradient(const MemoryLossOracle& oracle, const Vector& w) {
  SCREAM_REQUIRE(static_cast<bool>(oracle.unary_grad), "oracle has no gradient");
  Vector g = oracle.unary_grad(w);
  if (!g.allFinite()) throw NumericalError("unary_gradient: non-finite gradient");
  return g;
}

MemoryLossOracle square_loss_oracle(Vector features, double target, double gradient_bound) {
  MemoryLossOracle oracle;
  oracle.memory = 0;
  oracle.lipschitz = 0.0;
  oracle.gradient_bound = gradient_bound;
  oracle.window_loss = [x = features, target](std::span<const Vector> window) {
    const double r = window[0].dot(x) - target;
    return 0.5 * r * r;
  };
  oracle.unary_grad = [x = std::move(features), target](const Vector& w) -> Vector {
    return (w.dot(x) - target) * x;
  };
  return oracle;
}

MemoryLossOracle averaged_quadratic_oracle(int memory, Vector target, double diameter) {
  SCREAM_REQUIRE(memory >= 0, "memory must be non-negative");
  MemoryLossOracle oracle;
  oracle.memory = memory;
  // d/dw_k of 1/2||mean - c||^2 is (mean - c)/(m+1); mean - c is at most D + |c|.
  oracle.lipschitz = (diameter + target.norm()) / (memory + 1);
  oracle.gradient_bound = diameter + target.norm();
  oracle.window_loss = [target](std::span<const Vector> window) {
    Vector mean = Vector::Zero(target.size());
    for (const Vector& w : window) mean += w;
    mean /= static_cast<double>(window.size());
    return 0.5 * (mean - target).squaredNorm();
  };
  oracle.unary_grad = [target = std::move(target)](const Vector& w) -> Vector { return w - target; };
  return oracle;
}

MemoryLossOracle pairwise_distance_oracle(int dimension) {
  MemoryLossOracle oracle;
  oracle.memory = 1;
  oracle.lipschitz = 1.0;
  oracle.gradient_bound = 0.0;
  oracle.window_loss = [](std::span<const Vector> window) { return (window[0] - window[1]).norm(); };
  oracle.unary_grad = [dimension](const Vector&) -> Vector { return Vector::Zero(dimension); };
  return oracle;
}

bool ComparatorSequence::inside(const DomainBall& domain, double tol) const {
  for (const Vector& v : points) {
    if (!domain.contains(v, tol)) return false;
  }
  return true;
}

double ComparatorSequence::path_length() const { return scream::path_length(points); }

double path_length(std::span<const Vector> points) {
  double total = 0.0;
  for (std::size_t t = 1; t < points.size(); ++t) total += (points[t] - points[t - 1]).norm();
  return total;
}

std::vector<Vector> decision_window(std::span<const Vector> decisions, int round, int memory) {
  SCREAM_REQUIRE(round >= 1 && round <= static_cast<int>(decisions.size()), "round out of range");
  std::vector<Vector> window;
  window.reserve(static_cast<std::size_t>(memory + 1));
  for (int s = round - memory; s <= round; ++s) {
    window.push_back(decisions[static_cast<std::size_t>(std::max(s, 1) - 1)]);
  }
  return window;
}

RegretReport regret_metrics(std::span<const Vector> decisions, const ComparatorSequence& comparators,
                            std::span<const MemoryLossOracle> oracles, double lambda,
                            const std::optional<Vector>& fixed_comparator) {
  const std::size_t horizon = decisions.size();
  const bool compare = comparators.size() > 0 || fixed_comparator.has_value();
  SCREAM_REQUIRE(comparators.size() == 0 || comparators.size() == horizon,
                 "decision and comparator lengths differ");
  SCREAM_REQUIRE(oracles.size() == horizon, "one oracle per round is required");
  SCREAM_REQUIRE(lambda >= 0.0, "lambda must be non-negative");

  RegretReport report;
  if (horizon == 0) return report;

  if (!compare) {
    for (std::size_t t = 1; t <= horizon; ++t) {
      const MemoryLossOracle& f = oracles[t - 1];
      report.cumulative_loss +=
          eval_memory_loss(f, decision_window(decisions, static_cast<int>(t), f.memory));
    }
    report.switching_cost = lambda * path_length(decisions);
    return report;
  }

  Vector anchor;
  if (fixed_comparator) {
    anchor = *fixed_comparator;
  } else {
    anchor = Vector::Zero(comparators.points.front().size());
    for (const Vector& v : comparators.points) anchor += v;
    anchor /= static_cast<double>(horizon);
  }
  // For a constant comparator the mean is the comparator up to rounding; use
  // it verbatim so static and dynamic regret agree exactly.
  bool constant = comparators.size() > 0;
  for (const Vector& v : comparators.points) {
    if (v != comparators.points.front()) {
      constant = false;
      break;
    }
  }
  if (constant && !fixed_comparator) anchor = comparators.points.front();

  double static_loss = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const MemoryLossOracle& f = oracles[t - 1];
    const int round = static_cast<int>(t);
    report.cumulative_loss += eval_memory_loss(f, decision_window(decisions, round, f.memory));
    const std::vector<Vector> fixed(static_cast<std::size_t>(f.memory + 1), anchor);
    const double fixed_loss = eval_memory_loss(f, fixed);
    static_loss += fixed_loss;
    report.comparator_loss +=
        comparators.size() > 0
            ? eval_memory_loss(f, decision_window(comparators.points, round, f.memory))
            : fixed_loss;
  }
  report.switching_cost = lambda * path_length(decisions);
  report.path_length = comparators.path_length();
  report.dynamic_policy_regret = report.cumulative_loss - report.comparator_loss;
  report.static_policy_regret = report.cumulative_loss - static_loss;
  return report;
}

}  // namespace scream
