#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scream/types.hpp"

namespace scream {

using ComplexMatrix = Eigen::MatrixXcd;

/// x_{t+1} = A x_t + B u_t + w_t with declared bounds on A, B and w.
struct LinearSystem {
  Matrix A;
  Matrix B;
  double kappa_A = 0.0;
  double kappa_B = 0.0;
  double W = 1.0;

  LinearSystem() = default;
  /// Bounds default to the operator norms of A and B.
  LinearSystem(Matrix a, Matrix b, double disturbance_bound);

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  bool norms_within_bounds(double tol = 1e-12) const;
};

double operator_norm(const Matrix& m);

Vector step_dynamics(const LinearSystem& system, const Vector& x, const Vector& u, const Vector& w);
Vector recover_disturbance(const LinearSystem& system, const Vector& x_next, const Vector& x,
                           const Vector& u);

enum class DisturbanceKind { Constant, GaussianClipped, Sinusoidal, PiecewiseStep, AdversarialSign };

DisturbanceKind parse_disturbance_kind(const std::string& name);
std::string to_string(DisturbanceKind kind);

/// Seeded source of disturbances, every sample clipped to the W-ball.
///
/// `amplitude` is the scale of the random or periodic part and `offset` a
/// fixed mean added to it. `period` sets the sinusoid period or the length of
/// a piecewise-constant step.
class DisturbanceGenerator {
 public:
  DisturbanceGenerator() = default;
  DisturbanceGenerator(DisturbanceKind kind, int dimension, double bound, double amplitude,
                       std::uint64_t seed, Vector offset = {}, int period = 50);

  /// Disturbance for round t (0-based). AdversarialSign pushes against the
  /// current state and ignores the random stream.
  Vector sample(int t, const Vector& state);

  DisturbanceKind kind() const { return kind_; }
  double bound() const { return bound_; }
  int dimension() const { return dimension_; }

 private:
  Vector clip(Vector w) const;

  DisturbanceKind kind_ = DisturbanceKind::Constant;
  int dimension_ = 1;
  double bound_ = 1.0;
  double amplitude_ = 0.0;
  Vector offset_;
  int period_ = 50;
  std::mt19937_64 rng_;
  Vector direction_;
  Vector phase_;
  Vector level_;
};

/// (kappa, gamma) strong-stability certificate: A - BK = H L H^{-1} with L
/// diagonal, ||L|| <= 1 - gamma, and ||K||, ||H||, ||H^{-1}|| <= kappa.
struct StronglyStableController {
  Matrix K;
  double kappa = 1.0;
  double gamma = 0.0;
  ComplexMatrix H;
  ComplexMatrix H_inv;
  ComplexMatrix L;
};

enum class StabilityStatus { Accepted, Rejected, Defective };

struct StabilityCheck {
  StabilityStatus status = StabilityStatus::Rejected;
  std::string reason;
  StronglyStableController certificate;  // filled for Accepted and Rejected

  bool accepted() const { return status == StabilityStatus::Accepted; }
};

/// Builds the eigendecomposition certificate and tests it against the
/// declared kappa and gamma.
StabilityCheck check_strong_stability(const LinearSystem& system, const Matrix& K, double kappa,
                                      double gamma);

/// Tightest (kappa, gamma) this construction can certify for K. Throws
/// NumericalError when A - BK is defective or not strictly stable.
StronglyStableController certify(const LinearSystem& system, const Matrix& K);

struct Trajectory {
  std::vector<Vector> states;        // x_0 .. x_T
  std::vector<Vector> actions;       // u_0 .. u_{T-1}
  std::vector<Vector> disturbances;  // w_0 .. w_{T-1}
  std::vector<double> costs;

  double max_residual(const LinearSystem& system) const;
};

/// Owns the hidden state of a true system. Controllers only see states.
class Plant {
 public:
  Plant(LinearSystem system, DisturbanceGenerator disturbances);

  const Vector& state() const { return x_; }
  int round() const { return round_; }
  const LinearSystem& system() const { return system_; }

  /// Applies u, draws this round's disturbance and returns the next state.
  const Vector& step(const Vector& u);
  const Vector& last_disturbance() const { return w_; }

 private:
  LinearSystem system_;
  DisturbanceGenerator disturbances_;
  Vector x_;
  Vector w_;
  int round_ = 0;
};

/// Named benchmark system with a certified offset controller and a default
/// disturbance process.
struct ScenarioPreset {
  std::string name;
  LinearSystem system;
  StronglyStableController controller;
  DisturbanceGenerator disturbances;
};

/// Random symmetric A with spectral radius `radius` (one eigenvalue at the
/// radius) and B with uniform entries rescaled to unit operator norm.
LinearSystem random_symmetric_system(int dx, int du, double radius, double W, std::uint64_t seed);

/// Random diagonalizable A = V diag(lambda) V^{-1} with real eigenvalues and
/// spectral radius `radius`; V is a perturbed identity so it stays well
/// conditioned.
LinearSystem random_diagonalizable_system(int dx, int du, double radius, double W,
                                          std::uint64_t seed);

/// Presets: "scalar", "stable3x2", "tracking", "nonnormal3x2". `seed` draws
/// the system; the disturbance stream uses `noise_seed` when given.
ScenarioPreset make_preset(const std::string& name, std::uint64_t seed, double W = 1.0,
                           std::optional<std::uint64_t> noise_seed = std::nullopt);
std::vector<std::string> preset_names();

}  // namespace scream
