#pragma once

#include <functional>
#include <span>
#include <vector>

#include "scream/lds.hpp"
#include "scream/types.hpp"

namespace scream {

/// Disturbance-action parameters M[1..H], each d_u x d_x, stored stacked as
/// an (H d_u) x d_x matrix. Blocks are addressed from 1.
class DacParams {
 public:
  DacParams() = default;
  DacParams(int horizon, int du, int dx);
  static DacParams from_stacked(int horizon, Matrix stacked);

  int horizon() const { return horizon_; }
  int input_dim() const { return du_; }
  int state_dim() const { return dx_; }
  Eigen::Index size() const { return stacked_.size(); }

  auto block(int i) { return stacked_.middleRows(static_cast<Eigen::Index>(i - 1) * du_, du_); }
  auto block(int i) const {
    return stacked_.middleRows(static_cast<Eigen::Index>(i - 1) * du_, du_);
  }

  const Matrix& stacked() const { return stacked_; }
  Matrix& stacked() { return stacked_; }

  /// Column-major flattening; its Euclidean norm is the Frobenius norm.
  Vector vec() const;
  static DacParams from_vec(int horizon, int du, int dx, const Vector& v);

  double frobenius() const { return stacked_.norm(); }

 private:
  int horizon_ = 0;
  int du_ = 0;
  int dx_ = 0;
  Matrix stacked_;
};

/// Spectral-norm caps c_i = kappa_B kappa^3 (1 - gamma)^i for i = 1..H.
struct DacFeasibleSet {
  std::vector<double> caps;

  DacFeasibleSet() = default;
  DacFeasibleSet(int horizon, double kappa_B, double kappa, double gamma);

  int horizon() const { return static_cast<int>(caps.size()); }
  double cap(int i) const { return caps[static_cast<std::size_t>(i - 1)]; }
  bool contains(const DacParams& m, double tol = 1e-9) const;
};

/// Most recent disturbances, newest first. lag(k) is w_{t-k} when the window
/// holds w_0..w_{t-1}; anything older than the first push reads as zero.
class DisturbanceWindow {
 public:
  DisturbanceWindow() = default;
  DisturbanceWindow(int capacity, int dimension);

  void push(const Vector& w);
  const Vector& lag(int k) const;

  int capacity() const { return capacity_; }
  int dimension() const { return dimension_; }
  long pushed() const { return pushed_; }

 private:
  int capacity_ = 0;
  int dimension_ = 0;
  long pushed_ = 0;
  std::vector<Vector> buffer_;
  Vector zero_;
};

/// Powers of the closed loop A_K = A - BK and the products A_K^j B, computed once.
class ClosedLoop {
 public:
  ClosedLoop(const LinearSystem& system, const Matrix& K, int max_power);

  const Matrix& power(int j) const { return powers_.at(static_cast<std::size_t>(j)); }
  const Matrix& power_B(int j) const { return powers_B_.at(static_cast<std::size_t>(j)); }
  int max_power() const { return static_cast<int>(powers_.size()) - 1; }
  const Matrix& K() const { return K_; }
  const Matrix& A_K() const { return powers_.at(1); }
  int state_dim() const { return static_cast<int>(K_.cols()); }
  int input_dim() const { return static_cast<int>(K_.rows()); }

 private:
  Matrix K_;
  std::vector<Matrix> powers_;
  std::vector<Matrix> powers_B_;
};

/// u = -K x + sum_{i=1..H} M[i] w_{t-i}.
Vector dac_action(const Matrix& K, const DacParams& M, const Vector& x,
                  const DisturbanceWindow& window);

/// Psi_{t,i}^{K,h} = A_K^i 1{i <= h} + sum_{j=0..h} A_K^j B M_{t-j}[i-j] 1{1 <= i-j <= H}.
/// `recent[j]` holds M_{t-j} for j = 0..h.
Matrix transfer_matrix(const ClosedLoop& loop, int i, int h, std::span<const DacParams> recent);

/// State x_t reached from x_0 = 0 when M_0..M_{t-1} were played against
/// w_0..w_{t-1}. `params` and `disturbances` are indexed by round.
Vector state_via_transfer(const ClosedLoop& loop, std::span<const DacParams> params,
                          std::span<const Vector> disturbances, int t);

/// Per-round convex cost c_t(x, u). Gradients are optional.
struct ControlCost {
  std::function<double(const Vector&, const Vector&)> value;
  std::function<Vector(const Vector&, const Vector&)> grad_x;
  std::function<Vector(const Vector&, const Vector&)> grad_u;

  bool has_gradients() const { return static_cast<bool>(grad_x) && static_cast<bool>(grad_u); }
};

/// c(x, u) = ||x - r||^2 + rho ||u||^2.
ControlCost quadratic_tracking_cost(Vector target, double rho);

struct TruncatedEvaluation {
  double value = 0.0;
  Vector y;
  Vector v;
};

/// Truncated state and action at round t from the parameter window
/// M_{t-1-H}, ..., M_t (oldest first, H + 2 entries) and the disturbance
/// window holding w up to w_{t-1}.
TruncatedEvaluation truncated_loss(const ControlCost& cost, const ClosedLoop& loop,
                                   std::span<const DacParams> params,
                                   const DisturbanceWindow& window);

/// The same with all H + 2 entries equal to M.
TruncatedEvaluation unary_truncated_loss(const ControlCost& cost, const ClosedLoop& loop,
                                         const DacParams& M, const DisturbanceWindow& window);

/// Analytic gradient of the unary truncated loss. Falls back to central
/// differences (with a one-time warning on stderr) when the cost has no
/// gradients.
DacParams unary_truncated_gradient(const ControlCost& cost, const ClosedLoop& loop,
                                   const DacParams& M, const DisturbanceWindow& window);

DacParams finite_difference_gradient(const ControlCost& cost, const ClosedLoop& loop,
                                     const DacParams& M, const DisturbanceWindow& window,
                                     double step = 1e-6);

/// y = y0 + Jy vec(M) and v = v0 + Jv vec(M) for the unary truncated state
/// and action at the current round.
struct UnaryAffineMap {
  Vector y0;
  Matrix Jy;
  Vector v0;
  Matrix Jv;
};

UnaryAffineMap unary_affine_map(const ClosedLoop& loop, int horizon,
                                const DisturbanceWindow& window);

/// Frobenius projection onto the feasible set, block by block via SVD clipping.
DacParams project_to_dac_set(const DacParams& M, const DacFeasibleSet& set);

struct LipschitzConstants {
  double tau = 0.0;
  double D = 0.0;
  double L_f = 0.0;
  double G_f = 0.0;
  double D_f = 0.0;
  double lambda_theory = 0.0;  // (H + 2)^2 L_f
  double lambda = 0.0;         // lambda_theory times the override multiplier
};

LipschitzConstants lipschitz_constants(const LinearSystem& system,
                                       const StronglyStableController& controller, int horizon,
                                       double cost_gradient, double lambda_multiplier = 1.0);

/// kappa^2 (1 - gamma)^{H+1} D.
double state_truncation_bound(const StronglyStableController& controller, int horizon, double D);

/// 2 G_c D^2 kappa^3 (1 - gamma)^{H+1}.
double loss_truncation_bound(const StronglyStableController& controller, int horizon, double D,
                             double cost_gradient);

/// kappa^2 (1 - gamma)^i + H kappa_B kappa^2 tau (1 - gamma)^{i-1}.
double transfer_norm_bound(const StronglyStableController& controller, double kappa_B, int horizon,
                           int i);

}  // namespace scream
