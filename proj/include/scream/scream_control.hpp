#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scream/dac.hpp"
#include "scream/lds.hpp"
#include "scream/oco.hpp"
#include "scream/scream.hpp"

namespace scream {

struct ControlPool {
  StepSizePool pool;
  double meta_rate = 0.0;
};

/// eta_i = 2^{i-1} sqrt(D_f^2 / ((lambda G_f + G_f^2) T)) and
/// eps = sqrt(2 / ((2 lambda + G_f)(lambda + G_f) D_f^2 T)).
ControlPool control_pool(const LipschitzConstants& constants, long horizon);

/// ceil(log(T) / log(1 / (1 - gamma))), at least 1.
int default_truncation(double gamma, long horizon);

struct ControlConfig {
  long horizon = 1;
  int H = 1;
  double cost_gradient = 1.0;  // G_c
  double lambda_multiplier = 1.0;
  StronglyStableController controller;
  LipschitzConstants constants;
  ControlPool pool;
  DacFeasibleSet feasible;
};

/// Assembles every derived quantity for a system and certified K. H is
/// chosen by default_truncation unless given.
ControlConfig make_control_config(const LinearSystem& system,
                                  const StronglyStableController& controller, long horizon,
                                  double cost_gradient, double lambda_multiplier = 1.0,
                                  std::optional<int> truncation = std::nullopt);

/// Round-indexed (0-based) cost functions.
using CostStream = std::function<ControlCost(int round)>;

/// Online DAC controller. `act` emits u_t for the current state; `observe`
/// runs the learning step on c_t and then records w_t recovered from the
/// model (A, B). Parameters stay at their initial value for the first H
/// rounds.
class DacController {
 public:
  virtual ~DacController() = default;
  virtual Vector act(const Vector& x) = 0;
  virtual void observe(const ControlCost& cost, const Vector& x_next) = 0;
  virtual DacParams current() const = 0;
  virtual std::string name() const = 0;

  int gradient_evaluations() const { return gradient_evaluations_; }

 protected:
  int gradient_evaluations_ = 0;
};

class ScreamController : public DacController {
 public:
  ScreamController(const ControlConfig& config, const LinearSystem& model);
  /// Overrides the pool, e.g. a single expert.
  ScreamController(const ControlConfig& config, const LinearSystem& model, MetaSpec spec);

  Vector act(const Vector& x) override;
  void observe(const ControlCost& cost, const Vector& x_next) override;
  DacParams current() const override { return aggregate_; }
  std::string name() const override { return "scream"; }

  const ScreamState& meta() const { return state_; }
  const MetaSpec& spec() const { return spec_; }
  double last_weight_movement() const { return last_movement_; }
  double last_loss_sup() const { return last_loss_sup_; }
  DacParams expert(int i) const;
  int round() const { return round_; }

 private:
  ControlConfig config_;
  LinearSystem model_;
  ClosedLoop loop_;
  MetaSpec spec_;
  ScreamState state_;
  DisturbanceWindow window_;
  DacParams aggregate_;
  Vector x_;
  Vector u_;
  int round_ = 0;
  double last_movement_ = 0.0;
  double last_loss_sup_ = 0.0;
};

/// Single-learner projected gradient descent on the unary truncated loss.
class OgdController : public DacController {
 public:
  OgdController(const ControlConfig& config, const LinearSystem& model, double step);

  Vector act(const Vector& x) override;
  void observe(const ControlCost& cost, const Vector& x_next) override;
  DacParams current() const override { return params_; }
  std::string name() const override { return "ogd"; }

 private:
  ControlConfig config_;
  LinearSystem model_;
  ClosedLoop loop_;
  DisturbanceWindow window_;
  DacParams params_;
  double step_;
  Vector x_;
  Vector u_;
  int round_ = 0;
};

struct ControlRun {
  std::string algorithm;
  std::vector<Vector> states;        // x_0 .. x_T
  std::vector<Vector> actions;       // u_0 .. u_{T-1}
  std::vector<Vector> disturbances;  // true w_0 .. w_{T-1}
  std::vector<double> costs;
  std::vector<DacParams> params;  // M_t played at round t
  std::vector<double> weight_movement;
  std::vector<double> loss_sup;
  std::vector<double> entropy;
  double meta_rate = 0.0;
  int gradient_evaluations = 0;

  double total_cost() const;
  Trajectory trajectory() const;
};

/// Closed loop of `controller` on the true plant for `rounds` rounds. The
/// plant's state at entry is the initial state.
ControlRun run_controller(DacController& controller, Plant& plant, const CostStream& costs,
                          long rounds, int round_offset = 0);

/// Re-simulates the closed loop from x_0 = 0 under the given per-round DAC
/// parameters on the recorded disturbances.
std::vector<double> replay_costs(const LinearSystem& system, const Matrix& K,
                                 std::span<const DacParams> params,
                                 std::span<const Vector> disturbances, const CostStream& costs);

/// Regret of a run against a comparator policy sequence, both evaluated on
/// the run's true disturbances.
RegretReport dynamic_policy_regret_control(const ControlRun& run, const LinearSystem& system,
                                           const Matrix& K,
                                           std::span<const DacParams> comparators,
                                           const CostStream& costs);

/// Quadratic tracking problem: c_t = ||x - r_t||^2 + rho ||u||^2.
struct TrackingTask {
  std::vector<Vector> targets;  // one per round
  double rho = 0.1;

  CostStream stream() const;
  double cost_gradient(double D) const;
};

/// S piecewise-constant targets of norm `radius` in random directions.
TrackingTask piecewise_targets(int dimension, long horizon, int segments, double radius,
                               double rho, std::uint64_t seed);

/// Best fixed feasible M for rounds [begin, end) measured by the unary
/// truncated quadratic tracking loss, found by accelerated projected
/// gradient on the exact quadratic.
DacParams best_fixed_dac(const ClosedLoop& loop, int H, const DacFeasibleSet& feasible,
                         std::span<const Vector> disturbances, const TrackingTask& task,
                         long begin, long end, int iterations = 400);

/// Per-segment best fixed comparators expanded to one entry per round.
std::vector<DacParams> segment_comparators(const ClosedLoop& loop, int H,
                                           const DacFeasibleSet& feasible,
                                           std::span<const Vector> disturbances,
                                           const TrackingTask& task, int segments);

double dac_path_length(std::span<const DacParams> params);

}  // namespace scream
