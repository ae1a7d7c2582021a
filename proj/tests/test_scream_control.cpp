#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "scream/scream_control.hpp"

using namespace scream;

namespace {

struct Tracking {
  ScenarioPreset preset;
  TrackingTask task;
  ControlConfig config;
};

Tracking make_setup(const std::string& name, long T, int H, std::uint64_t seed) {
  Tracking s;
  s.preset = make_preset(name, seed);
  const LinearSystem& sys = s.preset.system;
  s.task = piecewise_targets(sys.state_dim(), T, 3, 0.5, 0.1, seed + 7);
  const double D = lipschitz_constants(sys, s.preset.controller, H, 1.0).D;
  s.config = make_control_config(sys, s.preset.controller, T, s.task.cost_gradient(D), 1.0, H);
  return s;
}

}  // namespace

TEST(ControlPool, MatchesOcoPool) {
  LipschitzConstants c;
  c.D_f = 1.0;
  c.G_f = 1.0;
  c.lambda = 0.0;
  const ControlPool p = control_pool(c, 100);
  EXPECT_EQ(p.pool.steps, build_step_size_pool(100, 1.0, 1.0, 0.0).steps);
  EXPECT_NEAR(p.pool[0], 0.1, 1e-15);
  EXPECT_NEAR(p.meta_rate, std::sqrt(2.0 / 100.0), 1e-15);
}

TEST(ControlPool, DefaultTruncation) {
  EXPECT_EQ(default_truncation(0.5, 1000), 10);
  EXPECT_EQ(default_truncation(0.5, 1), 1);
  EXPECT_EQ(default_truncation(0.1, 4000), static_cast<int>(std::ceil(std::log(4000.0) / std::log(1 / 0.9))));
}

TEST(ScreamController, SingleExpertMatchesOgd) {
  const Tracking s = make_setup("stable3x2", 300, 3, 1);
  const double step = 0.01;
  MetaSpec spec;
  spec.pool.steps = {step};
  spec.prior = Vector::Ones(1);
  spec.meta_rate = 0.5;
  spec.meta_lambda = s.config.constants.lambda;
  ScreamController scream(s.config, s.preset.system, spec);
  OgdController ogd(s.config, s.preset.system, step);
  Plant pa(s.preset.system, s.preset.disturbances);
  Plant pb(s.preset.system, s.preset.disturbances);
  const ControlRun a = run_controller(scream, pa, s.task.stream(), 300);
  const ControlRun b = run_controller(ogd, pb, s.task.stream(), 300);
  for (std::size_t t = 0; t < a.actions.size(); ++t)
    EXPECT_LE((a.actions[t] - b.actions[t]).norm(), 1e-12) << t;
}

TEST(ScreamController, ZeroDisturbancesKeepParametersAtZero) {
  const ScenarioPreset p = make_preset("stable3x2", 2);
  const ControlConfig config = make_control_config(p.system, p.controller, 100, 2.0, 1.0, 2);
  ScreamController ctl(config, p.system);
  Plant plant(p.system, DisturbanceGenerator(DisturbanceKind::Constant, 3, 1.0, 0.0, 0));
  TrackingTask task;
  task.targets.assign(100, Vector::Zero(3));
  const ControlRun run = run_controller(ctl, plant, task.stream(), 100);
  for (const DacParams& M : run.params) EXPECT_EQ(M.frobenius(), 0.0);
  EXPECT_EQ(run.total_cost(), 0.0);
}

TEST(ScreamController, ScalarFirstLearningStep) {
  const double a = 0.5, r = 0.3;
  const LinearSystem sys(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, 1.0), 1.0);
  const StronglyStableController ctl = certify(sys, Matrix::Zero(1, 1));
  const ControlConfig config = make_control_config(sys, ctl, 50, 4.0, 1.0, 1);
  MetaSpec spec;
  spec.pool.steps = {0.1};
  spec.prior = Vector::Ones(1);
  spec.meta_rate = 1.0;
  spec.meta_lambda = 0.0;
  ScreamController learner(config, sys, spec);
  Plant plant(sys, DisturbanceGenerator(DisturbanceKind::GaussianClipped, 1, 1.0, 0.5, 3));
  TrackingTask task;
  task.targets.assign(50, Vector::Constant(1, r));
  const ControlRun run = run_controller(learner, plant, task.stream(), 4);
  const double w0 = run.disturbances[0][0], w1 = run.disturbances[1][0];
  for (int t = 0; t < 3; ++t) EXPECT_EQ(run.params[static_cast<std::size_t>(t)].frobenius(), 0.0);
  // round 1 sees only w0, so its gradient vanishes; round 2 has y = w1 + a w0 and v = 0
  const double grad = 2.0 * (w1 + a * w0 - r) * w0;
  const double expected = std::clamp(-0.1 * grad, -config.feasible.cap(1), config.feasible.cap(1));
  EXPECT_NEAR(run.params[3].stacked()(0, 0), expected, 1e-14);
}

TEST(ScreamController, AggregateIsWeightedExperts) {
  const Tracking s = make_setup("tracking", 200, 3, 3);
  ScreamController ctl(s.config, s.preset.system);
  Plant plant(s.preset.system, s.preset.disturbances);
  const CostStream costs = s.task.stream();
  for (int t = 0; t < 200; ++t) {
    const Vector u = ctl.act(plant.state());
    const Vector& next = plant.step(u);
    ctl.observe(costs(t), next);
    Matrix sum = Matrix::Zero(ctl.current().stacked().rows(), ctl.current().stacked().cols());
    for (int i = 0; i < ctl.spec().pool.size(); ++i) {
      const DacParams e = ctl.expert(i);
      EXPECT_TRUE(s.config.feasible.contains(e));
      sum += ctl.meta().weights[i] * e.stacked();
    }
    const DacParams mixed = DacParams::from_vec(3, 2, 3, ctl.meta().aggregate());
    EXPECT_LE((sum - mixed.stacked()).norm(), 1e-12);
    EXPECT_TRUE(on_simplex(ctl.meta().weights));
  }
  EXPECT_EQ(ctl.gradient_evaluations(), 200 - 3);
}

TEST(ControlRegret, SelfComparatorHasZeroRegret) {
  const Tracking s = make_setup("stable3x2", 300, 3, 4);
  ScreamController ctl(s.config, s.preset.system);
  Plant plant(s.preset.system, s.preset.disturbances);
  const ControlRun run = run_controller(ctl, plant, s.task.stream(), 300);
  const RegretReport r =
      dynamic_policy_regret_control(run, s.preset.system, s.preset.controller.K, run.params, s.task.stream());
  EXPECT_LE(std::abs(r.dynamic_policy_regret), 1e-8 * std::max(1.0, run.total_cost()));
  EXPECT_NEAR(r.path_length, dac_path_length(run.params), 1e-12);
}

TEST(ControlRegret, ConstantComparatorStaticEqualsDynamic) {
  const Tracking s = make_setup("stable3x2", 200, 2, 5);
  OgdController ctl(s.config, s.preset.system, 0.01);
  Plant plant(s.preset.system, s.preset.disturbances);
  const ControlRun run = run_controller(ctl, plant, s.task.stream(), 200);
  DacParams M(2, 2, 3);
  M.stacked().setConstant(0.05);
  const std::vector<DacParams> comps(200, M);
  const RegretReport r =
      dynamic_policy_regret_control(run, s.preset.system, s.preset.controller.K, comps, s.task.stream());
  EXPECT_EQ(r.path_length, 0.0);
  EXPECT_DOUBLE_EQ(r.static_policy_regret, r.dynamic_policy_regret);
}

TEST(ControlRegret, ReplayMatchesDirectSimulation) {
  const ScenarioPreset p = make_preset("nonnormal3x2", 6);
  const LinearSystem& sys = p.system;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  const int T = 150, H = 2;
  std::vector<DacParams> params;
  std::vector<Vector> w;
  for (int t = 0; t < T; ++t) {
    DacParams M(H, 2, 3);
    for (Eigen::Index k = 0; k < M.size(); ++k) M.stacked().data()[k] = 0.05 * normal(rng);
    params.push_back(M);
    Vector wt(3);
    for (int i = 0; i < 3; ++i) wt[i] = 0.2 * normal(rng);
    w.push_back(wt);
  }
  const TrackingTask task = piecewise_targets(3, T, 2, 0.5, 0.1, 8);
  const CostStream costs = task.stream();
  const std::vector<double> replay = replay_costs(sys, p.controller.K, params, w, costs);
  Vector x = Vector::Zero(3);
  for (int t = 0; t < T; ++t) {
    Vector u = -p.controller.K * x;
    for (int i = 1; i <= H; ++i)
      if (t - i >= 0) u += params[t].block(i) * w[static_cast<std::size_t>(t - i)];
    const double c = costs(t).value(x, u);
    EXPECT_NEAR(replay[static_cast<std::size_t>(t)], c, 1e-10 * std::max(1.0, c));
    x = sys.A * x + sys.B * u + w[static_cast<std::size_t>(t)];
  }
}

TEST(Comparators, SegmentsArePiecewiseConstantAndFeasible) {
  const Tracking s = make_setup("tracking", 300, 2, 9);
  Plant plant(s.preset.system, s.preset.disturbances);
  OgdController ctl(s.config, s.preset.system, 0.01);
  const ControlRun run = run_controller(ctl, plant, s.task.stream(), 300);
  const ClosedLoop loop(s.preset.system, s.preset.controller.K, 2 * 2 + 1);
  const std::vector<DacParams> comps =
      segment_comparators(loop, 2, s.config.feasible, run.disturbances, s.task, 3);
  ASSERT_EQ(comps.size(), 300u);
  int changes = 0;
  for (std::size_t t = 0; t < comps.size(); ++t) {
    EXPECT_TRUE(s.config.feasible.contains(comps[t]));
    if (t > 0 && comps[t].stacked() != comps[t - 1].stacked()) ++changes;
  }
  EXPECT_LE(changes, 2);
}
