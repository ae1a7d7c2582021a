#include "scream/scream.hpp"

#include <cmath>

namespace scream {

int pool_size(long horizon) {
  SCREAM_REQUIRE(horizon >= 1, "horizon must be positive");
  return static_cast<int>(std::ceil(0.5 * std::log2(1.0 + static_cast<double>(horizon)))) + 1;
}

StepSizePool build_step_size_pool(long horizon, double diameter, double gradient_bound,
                                  double lambda) {
  SCREAM_REQUIRE(horizon >= 1, "horizon must be positive");
  SCREAM_REQUIRE(diameter > 0.0 && gradient_bound > 0.0, "D and G must be positive");
  SCREAM_REQUIRE(lambda >= 0.0, "lambda must be non-negative");
  const int n = pool_size(horizon);
  const double base =
      std::sqrt(diameter * diameter /
                ((lambda * gradient_bound + gradient_bound * gradient_bound) * horizon));
  StepSizePool pool;
  pool.steps.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.steps[static_cast<std::size_t>(i)] = std::ldexp(base, i);
  return pool;
}

Vector nonuniform_prior(int n) {
  SCREAM_REQUIRE(n >= 1, "need at least one expert");
  Vector p(n);
  for (int i = 1; i <= n; ++i) {
    p[i - 1] = static_cast<double>(n + 1) / (static_cast<double>(n) * i * (i + 1.0));
  }
  return p;
}

Vector uniform_prior(int n) {
  SCREAM_REQUIRE(n >= 1, "need at least one expert");
  return Vector::Constant(n, 1.0 / n);
}

double ScreamConfig::lambda() const {
  if (lambda_override) return *lambda_override;
  return static_cast<double>(memory) * memory * lipschitz;
}

double ScreamConfig::meta_rate() const {
  const double lam = lambda();
  const double g = gradient_bound;
  return std::sqrt(2.0 / ((2.0 * lam + g) * (lam + g) * diameter * diameter * horizon));
}

StepSizePool ScreamConfig::pool() const {
  return build_step_size_pool(horizon, diameter, gradient_bound, lambda());
}

MetaSpec scream_spec(const ScreamConfig& config) {
  MetaSpec spec;
  spec.pool = config.pool();
  spec.prior = nonuniform_prior(spec.pool.size());
  spec.meta_rate = config.meta_rate();
  spec.meta_lambda = config.lambda();
  return spec;
}

MetaSpec ader_spec(const ScreamConfig& config) {
  MetaSpec spec;
  spec.pool = config.pool();
  const int n = spec.pool.size();
  spec.prior = uniform_prior(n);
  const double gd = config.gradient_bound * config.diameter;
  spec.meta_rate = std::sqrt(8.0 * std::log(static_cast<double>(n)) / (gd * gd * config.horizon));
  spec.meta_lambda = 0.0;
  return spec;
}

Vector surrogate_loss(const std::vector<Vector>& experts, const std::vector<Vector>& previous,
                      const Vector& gradient, double lambda) {
  SCREAM_REQUIRE(experts.size() == previous.size(), "expert history length mismatch");
  Vector losses(static_cast<Eigen::Index>(experts.size()));
  for (std::size_t i = 0; i < experts.size(); ++i) {
    double value = gradient.dot(experts[i]);
    if (lambda != 0.0) value += lambda * (experts[i] - previous[i]).norm();
    losses[static_cast<Eigen::Index>(i)] = value;
  }
  return losses;
}

ScreamState ScreamState::start(const MetaSpec& spec, const Vector& origin) {
  SCREAM_REQUIRE(spec.prior.size() == spec.pool.size(), "prior and pool sizes differ");
  ScreamState state;
  state.experts.assign(static_cast<std::size_t>(spec.pool.size()), origin);
  state.previous = state.experts;
  state.weights = spec.prior;
  return state;
}

Vector ScreamState::aggregate() const {
  Vector w = Vector::Zero(experts.front().size());
  for (std::size_t i = 0; i < experts.size(); ++i) {
    w += weights[static_cast<Eigen::Index>(i)] * experts[i];
  }
  return w;
}

RoundRecord meta_expert_update(ScreamState& state, const MetaSpec& spec, const Vector& gradient,
                               const Projector& project) {
  if (!gradient.allFinite()) throw NumericalError("meta_expert_update: non-finite gradient");
  RoundRecord record;
  record.decision = state.aggregate();
  if (state.round == 0) state.previous = state.experts;
  record.losses = surrogate_loss(state.experts, state.previous, gradient, spec.meta_lambda);

  const Vector next = hedge_update(state.weights, record.losses, spec.meta_rate);
  record.weight_movement = (next - state.weights).lpNorm<1>();
  state.weights = next;

  state.previous = state.experts;
  for (std::size_t i = 0; i < state.experts.size(); ++i) {
    state.experts[i] = project(state.experts[i] - spec.pool[static_cast<int>(i)] * gradient);
  }
  ++state.round;
  return record;
}

RoundRecord scream_round(ScreamState& state, const MetaSpec& spec, const DomainBall& domain,
                         const MemoryLossOracle& oracle) {
  const Vector decision = state.aggregate();
  const Vector gradient = unary_gradient(oracle, decision);
  return meta_expert_update(state, spec, gradient,
                            [&domain](const Vector& x) { return domain.project(x); });
}

namespace {

void finish_report(OnlineRun& run, const ComparatorSequence& comparators,
                   const std::vector<MemoryLossOracle>& oracles, const RunOptions& options) {
  run.report = regret_metrics(run.decisions, comparators, oracles, run.lambda,
                              options.fixed_comparator);
  run.switching.assign(run.decisions.size(), 0.0);
  for (std::size_t t = 1; t < run.decisions.size(); ++t) {
    run.switching[t] = run.lambda * (run.decisions[t] - run.decisions[t - 1]).norm();
  }
  run.losses.resize(run.decisions.size());
  for (std::size_t t = 0; t < run.decisions.size(); ++t) {
    const MemoryLossOracle& f = oracles[t];
    run.losses[t] =
        eval_memory_loss(f, decision_window(run.decisions, static_cast<int>(t + 1), f.memory));
  }
}

}  // namespace

OnlineRun run_meta_expert(const std::string& name, const ScreamConfig& config, const MetaSpec& spec,
                          const LossStream& stream, const ComparatorSequence& comparators,
                          const RunOptions& options) {
  const DomainBall domain = config.domain();
  ScreamState state = ScreamState::start(spec, Vector::Zero(config.dimension));
  const Projector project = [&domain](const Vector& x) { return domain.project(x); };

  OnlineRun run;
  run.algorithm = name;
  run.lambda = config.lambda();
  run.meta_rate = spec.meta_rate;
  std::vector<MemoryLossOracle> oracles;
  oracles.reserve(static_cast<std::size_t>(config.horizon));
  run.decisions.reserve(static_cast<std::size_t>(config.horizon));

  for (long t = 1; t <= config.horizon; ++t) {
    const Vector decision = state.aggregate();
    oracles.push_back(stream(static_cast<int>(t)));
    const Vector gradient = unary_gradient(oracles.back(), decision);
    if (options.record_weights) run.weights.push_back(state.weights);
    RoundRecord record = meta_expert_update(state, spec, gradient, project);
    run.decisions.push_back(std::move(record.decision));
    run.gradient_norms.push_back(gradient.norm());
    run.weight_movement.push_back(record.weight_movement);
    run.loss_sup.push_back(record.losses.cwiseAbs().maxCoeff());
  }
  finish_report(run, comparators, oracles, options);
  return run;
}

OnlineRun run_scream(const ScreamConfig& config, const LossStream& stream,
                     const ComparatorSequence& comparators, const RunOptions& options) {
  return run_meta_expert("scream", config, scream_spec(config), stream, comparators, options);
}

OnlineRun run_ader(const ScreamConfig& config, const LossStream& stream,
                   const ComparatorSequence& comparators, const RunOptions& options) {
  return run_meta_expert("ader", config, ader_spec(config), stream, comparators, options);
}

double ogd_memory_step(const ScreamConfig& config) {
  const double g = config.gradient_bound;
  const double d = config.diameter;
  return std::sqrt(2.0 * d * d / ((g * g + config.lambda() * g) * config.horizon));
}

OnlineRun run_ogd_memory(const ScreamConfig& config, const LossStream& stream,
                         const ComparatorSequence& comparators, std::optional<double> step,
                         const RunOptions& options) {
  const DomainBall domain = config.domain();
  OmdState state{Vector::Zero(config.dimension), step.value_or(ogd_memory_step(config))};
  SCREAM_REQUIRE(state.rate > 0.0, "step size must be positive");

  OnlineRun run;
  run.algorithm = "ogd";
  run.lambda = config.lambda();
  run.step_size = state.rate;
  std::vector<MemoryLossOracle> oracles;
  oracles.reserve(static_cast<std::size_t>(config.horizon));
  run.decisions.reserve(static_cast<std::size_t>(config.horizon));

  for (long t = 1; t <= config.horizon; ++t) {
    run.decisions.push_back(state.point);
    oracles.push_back(stream(static_cast<int>(t)));
    const Vector gradient = unary_gradient(oracles.back(), state.point);
    run.gradient_norms.push_back(gradient.norm());
    state = ogd_step(state, gradient, domain);
  }
  finish_report(run, comparators, oracles, options);
  return run;
}

}  // namespace scream
