#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "scream/scream.hpp"

using namespace scream;

namespace {

LossStream quadratic_stream(Vector target) {
  return [target](int) { return averaged_quadratic_oracle(0, target, 2.0); };
}

ScreamConfig small_config(long T, int dim, double lambda) {
  ScreamConfig c;
  c.horizon = T;
  c.dimension = dim;
  c.diameter = 2.0;
  c.gradient_bound = 2.0;
  c.lambda_override = lambda;
  return c;
}

}  // namespace

TEST(StepSizePool, HundredRoundsExample) {
  const StepSizePool pool = build_step_size_pool(100, 2.0, 2.0, 0.0);
  ASSERT_EQ(pool.size(), 5);
  const double expected[] = {0.1, 0.2, 0.4, 0.8, 1.6};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(pool[i], expected[i], 1e-15);
}

TEST(StepSizePool, SingleRoundHasTwoEntries) {
  EXPECT_EQ(pool_size(1), 2);
  EXPECT_EQ(build_step_size_pool(1, 2.0, 2.0, 1.0).size(), 2);
}

TEST(StepSizePool, ZeroHorizonIsRejected) {
  EXPECT_THROW(build_step_size_pool(0, 2.0, 2.0, 0.0), ContractViolation);
}

TEST(StepSizePool, GeometricWithRatioTwo) {
  for (long T : {3L, 50L, 1000L, 20000L}) {
    const StepSizePool pool = build_step_size_pool(T, 1.5, 3.0, 0.4);
    EXPECT_EQ(pool.size(), static_cast<int>(std::ceil(0.5 * std::log2(1.0 + T))) + 1);
    for (int i = 1; i < pool.size(); ++i) EXPECT_EQ(pool[i], 2.0 * pool[i - 1]);
    EXPECT_EQ(pool[pool.size() - 1] / pool[0], std::ldexp(1.0, pool.size() - 1));
  }
}

TEST(Prior, Examples) {
  EXPECT_EQ(nonuniform_prior(1)[0], 1.0);
  const Vector p2 = nonuniform_prior(2);
  EXPECT_NEAR(p2[0], 0.75, 1e-15);
  EXPECT_NEAR(p2[1], 0.25, 1e-15);
  const Vector p3 = nonuniform_prior(3);
  EXPECT_NEAR(p3[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p3[1], 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(p3[2], 1.0 / 9.0, 1e-15);
}

TEST(Prior, NormalizedForManySizes) {
  for (int n = 1; n <= 1000; ++n) EXPECT_LE(std::abs(nonuniform_prior(n).sum() - 1.0), 1e-12);
}

TEST(ScreamConfig, DerivedQuantities) {
  ScreamConfig c;
  c.horizon = 400;
  c.memory = 2;
  c.lipschitz = 0.5;
  c.gradient_bound = 1.5;
  c.diameter = 2.0;
  EXPECT_DOUBLE_EQ(c.lambda(), 2.0);
  EXPECT_NEAR(c.meta_rate(), std::sqrt(2.0 / ((4.0 + 1.5) * (2.0 + 1.5) * 4.0 * 400)), 1e-15);
}

TEST(SurrogateLoss, Examples) {
  const std::vector<Vector> now = {Vector::Constant(1, 0.5)};
  const std::vector<Vector> prev = {Vector::Constant(1, 0.3)};
  EXPECT_NEAR(surrogate_loss(now, prev, Vector::Ones(1), 2.0)[0], 0.9, 1e-15);
  EXPECT_DOUBLE_EQ(surrogate_loss(now, prev, Vector::Ones(1), 0.0)[0], 0.5);
  EXPECT_DOUBLE_EQ(surrogate_loss(now, now, Vector::Constant(1, -2.0), 5.0)[0], -1.0);
}

TEST(ScreamRound, SingleExpertIsPlainOgd) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  MetaSpec spec;
  spec.pool.steps = {0.07};
  spec.prior = nonuniform_prior(1);
  spec.meta_rate = 0.3;
  spec.meta_lambda = 1.0;
  const DomainBall ball(3, 2.0);
  ScreamState state = ScreamState::start(spec, Vector::Zero(3));
  OmdState ogd{Vector::Zero(3), 0.07};
  for (int t = 0; t < 100; ++t) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x[i] = normal(rng);
    const MemoryLossOracle f = square_loss_oracle(x, normal(rng));
    const RoundRecord r = scream_round(state, spec, ball, f);
    EXPECT_EQ(r.decision, ogd.point);
    ogd = ogd_step(ogd, unary_gradient(f, ogd.point), ball);
  }
}

TEST(ScreamRound, ZeroGradientsFreezeEverything) {
  const ScreamConfig c = small_config(100, 2, 1.0);
  const MetaSpec spec = scream_spec(c);
  ScreamState state = ScreamState::start(spec, Vector::Constant(2, 0.1));
  const ScreamState initial = state;
  const MemoryLossOracle f = pairwise_distance_oracle(2);
  for (int t = 0; t < 20; ++t) scream_round(state, spec, c.domain(), f);
  EXPECT_LE((state.weights - initial.weights).lpNorm<1>(), 1e-14);
  for (std::size_t i = 0; i < state.experts.size(); ++i) EXPECT_EQ(state.experts[i], initial.experts[i]);
}

TEST(ScreamRound, TwoExpertHandTrace) {
  MetaSpec spec;
  spec.pool.steps = {0.1, 0.2};
  spec.prior = nonuniform_prior(2);
  spec.meta_rate = 0.5;
  spec.meta_lambda = 1.0;
  const DomainBall ball(1, 10.0);
  ScreamState state = ScreamState::start(spec, Vector::Zero(1));
  const MemoryLossOracle f = averaged_quadratic_oracle(0, Vector::Ones(1), 10.0);

  const RoundRecord r1 = scream_round(state, spec, ball, f);
  EXPECT_EQ(r1.decision[0], 0.0);
  EXPECT_NEAR(state.weights[0], 0.75, 1e-15);
  EXPECT_NEAR(state.experts[0][0], 0.1, 1e-15);
  EXPECT_NEAR(state.experts[1][0], 0.2, 1e-15);

  const RoundRecord r2 = scream_round(state, spec, ball, f);
  EXPECT_NEAR(r2.decision[0], 0.125, 1e-15);
  const double g = 0.125 - 1.0;
  const double l1 = g * 0.1 + 0.1, l2 = g * 0.2 + 0.2;
  EXPECT_NEAR(r2.losses[0], l1, 1e-15);
  EXPECT_NEAR(r2.losses[1], l2, 1e-15);
  const double a = 0.75 * std::exp(-0.5 * l1), b = 0.25 * std::exp(-0.5 * l2);
  EXPECT_NEAR(state.weights[0], a / (a + b), 1e-15);
  EXPECT_NEAR(state.experts[0][0], 0.1 - 0.1 * g, 1e-15);
  EXPECT_NEAR(state.experts[1][0], 0.2 - 0.2 * g, 1e-15);
  const double w3 = (a * (0.1 - 0.1 * g) + b * (0.2 - 0.2 * g)) / (a + b);
  EXPECT_NEAR(state.aggregate()[0], w3, 1e-15);
}

TEST(ScreamRound, InvariantsEveryRound) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  const ScreamConfig c = small_config(300, 4, 0.8);
  const MetaSpec spec = scream_spec(c);
  ScreamState state = ScreamState::start(spec, Vector::Zero(4));
  for (int t = 0; t < 300; ++t) {
    Vector x(4);
    for (int i = 0; i < 4; ++i) x[i] = 0.2 * normal(rng);
    scream_round(state, spec, c.domain(), square_loss_oracle(x, normal(rng)));
    EXPECT_TRUE(on_simplex(state.weights));
    Vector sum = Vector::Zero(4);
    for (std::size_t i = 0; i < state.experts.size(); ++i) {
      EXPECT_TRUE(c.domain().contains(state.experts[i]));
      sum += state.weights[static_cast<Eigen::Index>(i)] * state.experts[i];
    }
    EXPECT_LE((sum - state.aggregate()).norm(), 1e-12);
  }
}

TEST(ScreamRound, OneGradientPerRound) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  const ScreamConfig c = small_config(50, 3, 1.0);
  long calls = 0;
  const LossStream stream = [&](int) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x[i] = 0.3 * normal(rng);
    MemoryLossOracle f = square_loss_oracle(x, 0.5);
    auto inner = f.unary_grad;
    f.unary_grad = [&calls, inner](const Vector& w) {
      ++calls;
      return inner(w);
    };
    return f;
  };
  ComparatorSequence none;
  run_scream(c, stream, none);
  EXPECT_EQ(calls, 50);
  run_ader(c, stream, none);
  EXPECT_EQ(calls, 100);
  run_ogd_memory(c, stream, none);
  EXPECT_EQ(calls, 150);
}

TEST(Ader, SpecHasNoMovementTermAndUniformPrior) {
  const ScreamConfig c = small_config(1000, 2, 3.0);
  const MetaSpec a = ader_spec(c);
  EXPECT_EQ(a.meta_lambda, 0.0);
  const int n = a.pool.size();
  for (int i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(a.prior[i], 1.0 / n);
  EXPECT_NEAR(a.meta_rate, std::sqrt(8.0 * std::log(n) / (16.0 * 1000)), 1e-15);
  EXPECT_EQ(a.pool.steps, scream_spec(c).pool.steps);
}

TEST(Ader, DiffersFromZeroLambdaScreamOnlyThroughPriorAndRate) {
  const ScreamConfig c = small_config(200, 2, 0.0);
  Vector target(2);
  target << 0.4, -0.2;
  ComparatorSequence none;
  RunOptions opts;
  opts.record_weights = true;
  MetaSpec s = scream_spec(c);
  const MetaSpec a = ader_spec(c);
  s.prior = a.prior;
  s.meta_rate = a.meta_rate;
  const OnlineRun via_scream = run_meta_expert("x", c, s, quadratic_stream(target), none, opts);
  const OnlineRun via_ader = run_ader(c, quadratic_stream(target), none, opts);
  ASSERT_EQ(via_scream.decisions.size(), via_ader.decisions.size());
  for (std::size_t t = 0; t < via_ader.decisions.size(); ++t)
    EXPECT_EQ(via_scream.decisions[t], via_ader.decisions[t]);
}

TEST(Ader, StationaryNoisyStreamFavoursSmallSteps) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> normal;
  const long T = 20000;
  ScreamConfig c = small_config(T, 2, 0.0);
  std::vector<Vector> targets;
  for (long t = 0; t < T; ++t) {
    Vector r(2);
    r << 0.3 + 0.3 * normal(rng), -0.2 + 0.3 * normal(rng);
    targets.push_back(r);
  }
  const LossStream stream = [&](int round) {
    return averaged_quadratic_oracle(0, targets[static_cast<std::size_t>(round - 1)], 2.0);
  };
  RunOptions opts;
  opts.record_weights = true;
  const OnlineRun run = run_ader(c, stream, ComparatorSequence{}, opts);
  const Vector& p = run.weights.back();
  Eigen::Index best = 0;
  p.maxCoeff(&best);
  EXPECT_LT(best, p.size() / 2);
  EXPECT_LT(p[p.size() - 1], p[0]);
}

TEST(OgdMemory, DefaultStep) {
  ScreamConfig c = small_config(400, 2, 1.0);
  EXPECT_NEAR(ogd_memory_step(c), std::sqrt(2.0 * 4.0 / ((4.0 + 2.0) * 400)), 1e-15);
}

TEST(OgdMemory, SwitchingWithinEtaGT) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> normal;
  const ScreamConfig c = small_config(2000, 3, 0.5);
  std::vector<MemoryLossOracle> oracles;
  for (int t = 0; t < 2000; ++t) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x[i] = normal(rng);
    x *= 0.5 / std::max(0.5, x.norm());
    oracles.push_back(square_loss_oracle(x, 0.5 * normal(rng)));
  }
  const OnlineRun run = run_ogd_memory(c, [&](int t) { return oracles[t - 1]; }, ComparatorSequence{});
  double max_grad = 0.0;
  for (double g : run.gradient_norms) max_grad = std::max(max_grad, g);
  EXPECT_LE(path_length(run.decisions), run.step_size * max_grad * c.horizon);
  EXPECT_LE(path_length(run.decisions), run.step_size * c.gradient_bound * c.horizon);
}

TEST(OgdMemory, ZeroGradientStreamIsConstant) {
  const ScreamConfig c = small_config(50, 2, 1.0);
  const OnlineRun run =
      run_ogd_memory(c, [](int) { return pairwise_distance_oracle(2); }, ComparatorSequence{});
  for (const Vector& w : run.decisions) EXPECT_EQ(w, run.decisions.front());
}

TEST(OgdMemory, MonotoneApproachAndSublinearRegret) {
  Vector target = Vector::Constant(1, 0.8);
  std::vector<double> horizons, regrets;
  for (long T : {1000L, 4000L, 16000L}) {
    const ScreamConfig c = small_config(T, 1, 1.0);
    ComparatorSequence comps;
    comps.points.assign(static_cast<std::size_t>(T), target);
    const OnlineRun run = run_ogd_memory(c, quadratic_stream(target), comps);
    for (std::size_t t = 1; t < run.decisions.size(); ++t)
      EXPECT_LE(std::abs(run.decisions[t][0] - 0.8), std::abs(run.decisions[t - 1][0] - 0.8));
    horizons.push_back(std::log(static_cast<double>(T)));
    regrets.push_back(std::log(run.overall_loss() - run.report.comparator_loss));
  }
  const double slope = (regrets.back() - regrets.front()) / (horizons.back() - horizons.front());
  EXPECT_LT(slope, 0.9);
}

TEST(Scream, MetaRegretWithinBound) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const long T = 500;
    const ScreamConfig c = small_config(T, 3, 0.25 * trial);
    const MetaSpec spec = scream_spec(c);
    ScreamState state = ScreamState::start(spec, Vector::Zero(3));
    const int N = spec.pool.size();
    Vector cumulative = Vector::Zero(N);
    double mixed = 0.0, movement = 0.0;
    for (long t = 0; t < T; ++t) {
      Vector x(3);
      for (int i = 0; i < 3; ++i) x[i] = normal(rng);
      x *= 0.5 / std::max(0.5, x.norm());
      const Vector p = state.weights;
      const RoundRecord r = scream_round(state, spec, c.domain(), square_loss_oracle(x, 0.5 * normal(rng)));
      mixed += p.dot(r.losses);
      cumulative += r.losses;
      movement += r.weight_movement;
    }
    const double lambda = c.lambda();
    const double lhs = mixed - cumulative.minCoeff() + lambda * c.diameter * movement;
    const double bound = c.diameter * std::sqrt(2.0 * (2.0 * lambda + c.gradient_bound) *
                                                (lambda + c.gradient_bound) * T) *
                         (1.0 + std::log(N + 1.0));
    EXPECT_LE(lhs, bound);
  }
}

TEST(Scream, OverallWithinBestExpertPlusMetaBound) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    const long T = 2000;
    const ScreamConfig c = small_config(T, 2, 0.5 * trial);
    const MetaSpec spec = scream_spec(c);
    ScreamState state = ScreamState::start(spec, Vector::Zero(2));
    const int N = spec.pool.size();
    std::vector<double> expert_total(static_cast<std::size_t>(N), 0.0);
    double total = 0.0;
    Vector prev_w;
    std::vector<Vector> prev_experts;
    for (long t = 0; t < T; ++t) {
      Vector target(2);
      target << (t < T / 2 ? 0.5 : -0.5) + 0.2 * normal(rng), 0.2 * normal(rng);
      const MemoryLossOracle f = averaged_quadratic_oracle(0, target, 2.0);
      const std::vector<Vector> before = state.experts;
      const RoundRecord r = scream_round(state, spec, c.domain(), f);
      total += eval_unary_loss(f, r.decision);
      if (t > 0) total += c.lambda() * (r.decision - prev_w).norm();
      prev_w = r.decision;
      for (int i = 0; i < N; ++i) {
        const auto k = static_cast<std::size_t>(i);
        expert_total[k] += eval_unary_loss(f, before[k]);
        if (t > 0) expert_total[k] += c.lambda() * (before[k] - prev_experts[k]).norm();
      }
      prev_experts = before;
    }
    const double lambda = c.lambda();
    const double bound = c.diameter * std::sqrt(2.0 * (2.0 * lambda + c.gradient_bound) *
                                                (lambda + c.gradient_bound) * T) *
                         (1.0 + std::log(N + 1.0));
    EXPECT_LE(total, *std::min_element(expert_total.begin(), expert_total.end()) + bound);
  }
}
