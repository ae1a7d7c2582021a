#include <gtest/gtest.h>

#include <random>

#include "scream/oco.hpp"

using namespace scream;

namespace {

Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * normal(rng);
  return v;
}

}  // namespace

TEST(DomainBall, ProjectionLandsInside) {
  const DomainBall ball(3, 2.0);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const Vector p = ball.project(random_vector(3, rng, 3.0));
    EXPECT_LE(p.norm(), 1.0 + 1e-12);
    EXPECT_TRUE(ball.contains(p));
  }
  EXPECT_TRUE(ball.contains(Vector::Zero(3)));
}

TEST(MemoryLoss, SquareLossAtOrigin) {
  const MemoryLossOracle f = square_loss_oracle(Vector::Ones(4), 1.0);
  const std::vector<Vector> window = {Vector::Zero(4)};
  EXPECT_DOUBLE_EQ(eval_memory_loss(f, window), 0.5);
}

TEST(MemoryLoss, WrongWindowLengthIsRejected) {
  const MemoryLossOracle f = averaged_quadratic_oracle(2, Vector::Zero(2), 2.0);
  const std::vector<Vector> window = {Vector::Zero(2), Vector::Zero(2)};
  EXPECT_THROW(eval_memory_loss(f, window), ContractViolation);
}

TEST(MemoryLoss, PairwiseDistanceOfEqualPointsIsZero) {
  const MemoryLossOracle f = pairwise_distance_oracle(3);
  const Vector a = Vector::Constant(3, 0.2);
  const std::vector<Vector> window = {a, a};
  EXPECT_EQ(eval_memory_loss(f, window), 0.0);
}

TEST(MemoryLoss, IdenticalWindowEqualsUnaryBitForBit) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const Vector w = random_vector(3, rng);
    const std::vector<MemoryLossOracle> oracles = {
        square_loss_oracle(random_vector(3, rng), 0.3),
        averaged_quadratic_oracle(k % 4, random_vector(3, rng), 2.0),
        pairwise_distance_oracle(3),
    };
    for (const MemoryLossOracle& f : oracles) {
      const std::vector<Vector> window(static_cast<std::size_t>(f.memory + 1), w);
      EXPECT_EQ(eval_memory_loss(f, window), eval_unary_loss(f, w));
    }
  }
}

TEST(UnaryGradient, SquareLossExamples) {
  Vector x = Vector::Zero(3);
  x[0] = 1.0;
  EXPECT_EQ(unary_gradient(square_loss_oracle(x, 0.0), Vector::Zero(3)), Vector::Zero(3));
  const Vector g = unary_gradient(square_loss_oracle(Vector::Unit(2, 0), 1.0), Vector::Zero(2));
  EXPECT_DOUBLE_EQ(g[0], -1.0);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
}

TEST(UnaryGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const MemoryLossOracle f = k % 2 == 0
                                   ? square_loss_oracle(random_vector(4, rng), 0.7)
                                   : averaged_quadratic_oracle(2, random_vector(4, rng), 2.0);
    const Vector w = random_vector(4, rng, 0.5);
    const Vector g = unary_gradient(f, w);
    for (int i = 0; i < 4; ++i) {
      Vector p = w, m = w;
      p[i] += 1e-5;
      m[i] -= 1e-5;
      const double fd = (eval_unary_loss(f, p) - eval_unary_loss(f, m)) / 2e-5;
      EXPECT_LE(std::abs(fd - g[i]), 1e-5 * std::max({std::abs(g[i]), std::abs(fd), 1e-3}));
    }
  }
}

TEST(UnaryGradient, NonFiniteIsNumericalError) {
  MemoryLossOracle f = square_loss_oracle(Vector::Ones(2), 0.0);
  f.unary_grad = [](const Vector& w) -> Vector { return Vector::Constant(w.size(), NAN); };
  EXPECT_THROW(unary_gradient(f, Vector::Zero(2)), NumericalError);
}

TEST(RegretMetrics, IdenticalConstantSequences) {
  const Vector v = Vector::Constant(2, 0.1);
  const std::vector<Vector> decisions(5, v);
  ComparatorSequence comps;
  comps.points = decisions;
  const std::vector<MemoryLossOracle> oracles(5, square_loss_oracle(Vector::Ones(2), 1.0));
  const RegretReport r = regret_metrics(decisions, comps, oracles, 1.0);
  EXPECT_EQ(r.dynamic_policy_regret, 0.0);
  EXPECT_EQ(r.switching_cost, 0.0);
  EXPECT_EQ(r.path_length, 0.0);
}

TEST(RegretMetrics, SwitchingCostOfBackAndForth) {
  const std::vector<Vector> decisions = {Vector::Zero(1), Vector::Ones(1), Vector::Zero(1)};
  ComparatorSequence comps;
  comps.points = decisions;
  const std::vector<MemoryLossOracle> oracles(3, square_loss_oracle(Vector::Ones(1), 0.0));
  EXPECT_DOUBLE_EQ(regret_metrics(decisions, comps, oracles, 1.0).switching_cost, 2.0);
}

TEST(RegretMetrics, LengthMismatchIsRejected) {
  const std::vector<Vector> decisions(3, Vector::Zero(1));
  ComparatorSequence comps;
  comps.points.assign(2, Vector::Zero(1));
  const std::vector<MemoryLossOracle> oracles(3, square_loss_oracle(Vector::Ones(1), 0.0));
  EXPECT_THROW(regret_metrics(decisions, comps, oracles, 1.0), ContractViolation);
}

TEST(RegretMetrics, MatchesBruteForceSummation) {
  std::mt19937_64 rng(4);
  const int T = 40, m = 2;
  const DomainBall ball(3, 2.0);
  std::vector<Vector> decisions, comparators;
  std::vector<MemoryLossOracle> oracles;
  for (int t = 0; t < T; ++t) {
    decisions.push_back(ball.project(random_vector(3, rng)));
    comparators.push_back(ball.project(random_vector(3, rng)));
    oracles.push_back(averaged_quadratic_oracle(m, random_vector(3, rng), 2.0));
  }
  ComparatorSequence comps;
  comps.points = comparators;
  const double lambda = 0.7;
  const RegretReport r = regret_metrics(decisions, comps, oracles, lambda);

  auto window = [&](const std::vector<Vector>& seq, int t) {
    std::vector<Vector> w;
    for (int j = t - m; j <= t; ++j) w.push_back(seq[static_cast<std::size_t>(std::max(j, 0))]);
    return w;
  };
  double loss = 0, comp = 0, sw = 0, path = 0;
  for (int t = 0; t < T; ++t) {
    loss += oracles[t].window_loss(window(decisions, t));
    comp += oracles[t].window_loss(window(comparators, t));
    if (t > 0) {
      sw += (decisions[t] - decisions[t - 1]).norm();
      path += (comparators[t] - comparators[t - 1]).norm();
    }
  }
  EXPECT_NEAR(r.cumulative_loss, loss, 1e-12);
  EXPECT_NEAR(r.comparator_loss, comp, 1e-12);
  EXPECT_NEAR(r.switching_cost, lambda * sw, 1e-12);
  EXPECT_NEAR(r.path_length, path, 1e-12);
  EXPECT_NEAR(r.dynamic_policy_regret, loss - comp, 1e-12);
}

TEST(RegretMetrics, ConstantComparatorGivesStaticRegret) {
  std::mt19937_64 rng(5);
  std::vector<Vector> decisions;
  std::vector<MemoryLossOracle> oracles;
  for (int t = 0; t < 20; ++t) {
    decisions.push_back(random_vector(2, rng, 0.3));
    oracles.push_back(square_loss_oracle(random_vector(2, rng), 0.5));
  }
  ComparatorSequence comps;
  comps.points.assign(20, random_vector(2, rng, 0.3));
  const RegretReport r = regret_metrics(decisions, comps, oracles, 0.5);
  EXPECT_EQ(r.dynamic_policy_regret, r.static_policy_regret);
}

TEST(RegretMetrics, PolicyRegretDecomposition) {
  std::mt19937_64 rng(6);
  const DomainBall ball(3, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 4, T = 60;
    std::vector<Vector> decisions;
    std::vector<MemoryLossOracle> oracles;
    Vector w = Vector::Zero(3);
    for (int t = 0; t < T; ++t) {
      w = ball.project(w + random_vector(3, rng, 0.2));
      decisions.push_back(w);
      oracles.push_back(averaged_quadratic_oracle(m, random_vector(3, rng, 0.5), 2.0));
    }
    const Vector v = ball.project(random_vector(3, rng));
    ComparatorSequence comps;
    comps.points.assign(T, v);
    double unary_regret = 0.0;
    for (int t = 0; t < T; ++t)
      unary_regret += eval_unary_loss(oracles[t], decisions[t]) - eval_unary_loss(oracles[t], v);
    double L = 0.0;
    for (const MemoryLossOracle& f : oracles) L = std::max(L, f.lipschitz);
    const RegretReport r = regret_metrics(decisions, comps, oracles, m * m * L);
    EXPECT_LE(r.dynamic_policy_regret, unary_regret + r.switching_cost + 1e-12);
  }
}

TEST(DecisionWindow, PadsWithFirstDecision) {
  const std::vector<Vector> d = {Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)};
  const std::vector<Vector> w = decision_window(d, 1, 2);
  ASSERT_EQ(w.size(), 3u);
  for (const Vector& v : w) EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(decision_window(d, 2, 1).back()[0], 2.0);
}
