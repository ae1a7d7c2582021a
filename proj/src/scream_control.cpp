#include "scream/scream_control.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace scream {

ControlPool control_pool(const LipschitzConstants& constants, long horizon) {
  SCREAM_REQUIRE(constants.D_f > 0.0 && constants.G_f > 0.0, "D_f and G_f must be positive");
  ControlPool out;
  out.pool = build_step_size_pool(horizon, constants.D_f, constants.G_f, constants.lambda);
  const double lam = constants.lambda;
  const double g = constants.G_f;
  const double d = constants.D_f;
  out.meta_rate = std::sqrt(2.0 / ((2.0 * lam + g) * (lam + g) * d * d * horizon));
  return out;
}

int default_truncation(double gamma, long horizon) {
  SCREAM_REQUIRE(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  SCREAM_REQUIRE(horizon >= 1, "horizon must be positive");
  const double h = std::ceil(std::log(static_cast<double>(horizon)) / -std::log1p(-gamma));
  return std::max(1, static_cast<int>(h));
}

ControlConfig make_control_config(const LinearSystem& system,
                                  const StronglyStableController& controller, long horizon,
                                  double cost_gradient, double lambda_multiplier,
                                  std::optional<int> truncation) {
  ControlConfig config;
  config.horizon = horizon;
  config.H = truncation.value_or(default_truncation(controller.gamma, horizon));
  config.cost_gradient = cost_gradient;
  config.lambda_multiplier = lambda_multiplier;
  config.controller = controller;
  config.constants =
      lipschitz_constants(system, controller, config.H, cost_gradient, lambda_multiplier);
  config.pool = control_pool(config.constants, horizon);
  config.feasible = DacFeasibleSet(config.H, system.kappa_B, controller.kappa, controller.gamma);
  return config;
}

namespace {

MetaSpec control_spec(const ControlConfig& config) {
  MetaSpec spec;
  spec.pool = config.pool.pool;
  spec.prior = nonuniform_prior(spec.pool.size());
  spec.meta_rate = config.pool.meta_rate;
  spec.meta_lambda = config.constants.lambda;
  return spec;
}

}  // namespace

ScreamController::ScreamController(const ControlConfig& config, const LinearSystem& model)
    : ScreamController(config, model, control_spec(config)) {}

ScreamController::ScreamController(const ControlConfig& config, const LinearSystem& model,
                                   MetaSpec spec)
    : config_(config),
      model_(model),
      loop_(model, config.controller.K, config.H),
      spec_(std::move(spec)),
      window_(2 * config.H + 1, model.state_dim()),
      aggregate_(config.H, model.input_dim(), model.state_dim()) {
  state_ = ScreamState::start(spec_, aggregate_.vec());
}

DacParams ScreamController::expert(int i) const {
  return DacParams::from_vec(config_.H, model_.input_dim(), model_.state_dim(),
                             state_.experts.at(static_cast<std::size_t>(i)));
}

Vector ScreamController::act(const Vector& x) {
  x_ = x;
  aggregate_ =
      DacParams::from_vec(config_.H, model_.input_dim(), model_.state_dim(), state_.aggregate());
  u_ = dac_action(config_.controller.K, aggregate_, x, window_);
  return u_;
}

void ScreamController::observe(const ControlCost& cost, const Vector& x_next) {
  last_movement_ = 0.0;
  last_loss_sup_ = 0.0;
  if (round_ >= config_.H) {
    const DacParams grad = unary_truncated_gradient(cost, loop_, aggregate_, window_);
    ++gradient_evaluations_;
    const int H = config_.H;
    const int du = model_.input_dim();
    const int dx = model_.state_dim();
    const DacFeasibleSet& set = config_.feasible;
    const Projector project = [&](const Vector& v) {
      return project_to_dac_set(DacParams::from_vec(H, du, dx, v), set).vec();
    };
    const RoundRecord record = meta_expert_update(state_, spec_, grad.vec(), project);
    last_movement_ = record.weight_movement;
    last_loss_sup_ = record.losses.cwiseAbs().maxCoeff();
    for (const Vector& e : state_.experts) {
      if (!set.contains(DacParams::from_vec(H, du, dx, e))) {
        throw std::logic_error("ScreamController: expert left the feasible set");
      }
    }
  }
  window_.push(recover_disturbance(model_, x_next, x_, u_));
  ++round_;
}

OgdController::OgdController(const ControlConfig& config, const LinearSystem& model, double step)
    : config_(config),
      model_(model),
      loop_(model, config.controller.K, config.H),
      window_(2 * config.H + 1, model.state_dim()),
      params_(config.H, model.input_dim(), model.state_dim()),
      step_(step) {
  SCREAM_REQUIRE(step > 0.0, "step size must be positive");
}

Vector OgdController::act(const Vector& x) {
  x_ = x;
  u_ = dac_action(config_.controller.K, params_, x, window_);
  return u_;
}

void OgdController::observe(const ControlCost& cost, const Vector& x_next) {
  if (round_ >= config_.H) {
    const DacParams grad = unary_truncated_gradient(cost, loop_, params_, window_);
    ++gradient_evaluations_;
    DacParams moved = params_;
    moved.stacked() = params_.stacked() - step_ * grad.stacked();
    params_ = project_to_dac_set(moved, config_.feasible);
  }
  window_.push(recover_disturbance(model_, x_next, x_, u_));
  ++round_;
}

double ControlRun::total_cost() const {
  double total = 0.0;
  for (double c : costs) total += c;
  return total;
}

Trajectory ControlRun::trajectory() const {
  Trajectory t;
  t.states = states;
  t.actions = actions;
  t.disturbances = disturbances;
  t.costs = costs;
  return t;
}

ControlRun run_controller(DacController& controller, Plant& plant, const CostStream& costs,
                          long rounds, int round_offset) {
  ControlRun run;
  run.algorithm = controller.name();
  auto* meta = dynamic_cast<ScreamController*>(&controller);
  if (meta != nullptr) run.meta_rate = meta->spec().meta_rate;
  const auto n = static_cast<std::size_t>(rounds);
  run.states.reserve(n + 1);
  run.actions.reserve(n);
  run.disturbances.reserve(n);
  run.costs.reserve(n);
  run.params.reserve(n);
  run.states.push_back(plant.state());
  for (long t = 0; t < rounds; ++t) {
    const Vector x = plant.state();
    const Vector u = controller.act(x);
    const ControlCost cost = costs(round_offset + static_cast<int>(t));
    run.costs.push_back(cost.value(x, u));
    run.params.push_back(controller.current());
    const Vector x_next = plant.step(u);
    controller.observe(cost, x_next);
    run.actions.push_back(u);
    run.disturbances.push_back(plant.last_disturbance());
    run.states.push_back(x_next);
    if (meta != nullptr) {
      run.weight_movement.push_back(meta->last_weight_movement());
      run.loss_sup.push_back(meta->last_loss_sup());
      const Vector& p = meta->meta().weights;
      double h = 0.0;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
      }
      run.entropy.push_back(h);
    }
  }
  run.gradient_evaluations = controller.gradient_evaluations();
  return run;
}

std::vector<double> replay_costs(const LinearSystem& system, const Matrix& K,
                                 std::span<const DacParams> params,
                                 std::span<const Vector> disturbances, const CostStream& costs) {
  SCREAM_REQUIRE(!disturbances.empty() || params.empty(), "disturbance sequence unavailable");
  SCREAM_REQUIRE(params.size() == disturbances.size(), "one parameter set per disturbance");
  std::vector<double> out;
  if (params.empty()) return out;
  out.reserve(params.size());
  DisturbanceWindow window(params.front().horizon(), system.state_dim());
  Vector x = Vector::Zero(system.state_dim());
  for (std::size_t t = 0; t < params.size(); ++t) {
    const Vector u = dac_action(K, params[t], x, window);
    out.push_back(costs(static_cast<int>(t)).value(x, u));
    x = step_dynamics(system, x, u, disturbances[t]);
    window.push(disturbances[t]);
  }
  return out;
}

double dac_path_length(std::span<const DacParams> params) {
  double total = 0.0;
  for (std::size_t t = 1; t < params.size(); ++t) {
    total += (params[t].stacked() - params[t - 1].stacked()).norm();
  }
  return total;
}

RegretReport dynamic_policy_regret_control(const ControlRun& run, const LinearSystem& system,
                                           const Matrix& K,
                                           std::span<const DacParams> comparators,
                                           const CostStream& costs) {
  SCREAM_REQUIRE(run.disturbances.size() == run.costs.size() && !run.disturbances.empty(),
                 "disturbance sequence unavailable");
  SCREAM_REQUIRE(comparators.size() == run.costs.size(), "one comparator per round is required");
  RegretReport report;
  report.cumulative_loss = run.total_cost();
  for (double c : replay_costs(system, K, comparators, run.disturbances, costs)) {
    report.comparator_loss += c;
  }
  report.dynamic_policy_regret = report.cumulative_loss - report.comparator_loss;
  report.path_length = dac_path_length(comparators);
  bool constant = true;
  for (const DacParams& p : comparators) {
    if (p.stacked() != comparators.front().stacked()) {
      constant = false;
      break;
    }
  }
  if (constant) report.static_policy_regret = report.dynamic_policy_regret;
  return report;
}

CostStream TrackingTask::stream() const {
  auto shared = std::make_shared<const std::vector<Vector>>(targets);
  return [shared, rho = rho](int t) {
    return quadratic_tracking_cost(shared->at(static_cast<std::size_t>(t)), rho);
  };
}

double TrackingTask::cost_gradient(double D) const {
  double radius = 0.0;
  for (const Vector& r : targets) radius = std::max(radius, r.norm());
  return std::max(2.0 * (1.0 + radius / D), 2.0 * rho);
}

TrackingTask piecewise_targets(int dimension, long horizon, int segments, double radius,
                               double rho, std::uint64_t seed) {
  SCREAM_REQUIRE(segments >= 1 && horizon >= segments, "need 1 <= segments <= T");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TrackingTask task;
  task.rho = rho;
  task.targets.reserve(static_cast<std::size_t>(horizon));
  const long length = horizon / segments;
  Vector current(dimension);
  for (long t = 0; t < horizon; ++t) {
    if (t % length == 0 && t / length < segments) {
      for (int i = 0; i < dimension; ++i) current[i] = normal(rng);
      current *= radius / current.norm();
    }
    task.targets.push_back(current);
  }
  return task;
}

DacParams best_fixed_dac(const ClosedLoop& loop, int H, const DacFeasibleSet& feasible,
                         std::span<const Vector> disturbances, const TrackingTask& task,
                         long begin, long end, int iterations) {
  SCREAM_REQUIRE(begin >= 0 && begin < end && end <= static_cast<long>(disturbances.size()),
                 "segment outside the recorded horizon");
  const int du = loop.input_dim();
  const int dx = loop.state_dim();
  const Eigen::Index n = static_cast<Eigen::Index>(H) * du * dx;
  DisturbanceWindow window(2 * H + 1, dx);
  for (long s = std::max(0L, begin - (2 * H + 1)); s < begin; ++s) {
    window.push(disturbances[static_cast<std::size_t>(s)]);
  }
  Matrix Q = Matrix::Zero(n, n);
  Vector q = Vector::Zero(n);
  for (long t = begin; t < end; ++t) {
    const UnaryAffineMap map = unary_affine_map(loop, H, window);
    const Vector& r = task.targets[static_cast<std::size_t>(t)];
    Q.noalias() += map.Jy.transpose() * map.Jy + task.rho * map.Jv.transpose() * map.Jv;
    q.noalias() += map.Jy.transpose() * (map.y0 - r) + task.rho * map.Jv.transpose() * map.v0;
    window.push(disturbances[static_cast<std::size_t>(t)]);
  }
  // Objective m'Qm + 2q'm, gradient 2(Qm + q).
  const double top = Eigen::SelfAdjointEigenSolver<Matrix>(Q, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  if (top <= 0.0) return DacParams(H, du, dx);
  const double step = 1.0 / (2.0 * top);
  auto project = [&](const Vector& v) {
    return project_to_dac_set(DacParams::from_vec(H, du, dx, v), feasible).vec();
  };
  Vector m = Vector::Zero(n);
  Vector y = m;
  double momentum = 1.0;
  for (int k = 0; k < iterations; ++k) {
    const Vector next = project(y - step * 2.0 * (Q * y + q));
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / momentum_next) * (next - m);
    m = next;
    momentum = momentum_next;
  }
  return DacParams::from_vec(H, du, dx, m);
}

std::vector<DacParams> segment_comparators(const ClosedLoop& loop, int H,
                                           const DacFeasibleSet& feasible,
                                           std::span<const Vector> disturbances,
                                           const TrackingTask& task, int segments) {
  const long horizon = static_cast<long>(disturbances.size());
  SCREAM_REQUIRE(segments >= 1 && horizon >= segments, "need 1 <= segments <= T");
  const long length = horizon / segments;
  std::vector<DacParams> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int s = 0; s < segments; ++s) {
    const long begin = s * length;
    const long end = s + 1 == segments ? horizon : begin + length;
    const DacParams best = best_fixed_dac(loop, H, feasible, disturbances, task, begin, end);
    for (long t = begin; t < end; ++t) out.push_back(best);
  }
  return out;
}

}  // namespace scream
