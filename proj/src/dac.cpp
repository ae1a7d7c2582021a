#include "scream/dac.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <iostream>
#include <mutex>

namespace scream {

DacParams::DacParams(int horizon, int du, int dx)
    : horizon_(horizon), du_(du), dx_(dx), stacked_(Matrix::Zero(horizon * du, dx)) {
  SCREAM_REQUIRE(horizon >= 1 && du >= 1 && dx >= 1, "dimensions must be positive");
}

DacParams DacParams::from_stacked(int horizon, Matrix stacked) {
  SCREAM_REQUIRE(horizon >= 1 && stacked.rows() % horizon == 0, "rows must be a multiple of H");
  DacParams m(horizon, static_cast<int>(stacked.rows() / horizon), static_cast<int>(stacked.cols()));
  m.stacked_ = std::move(stacked);
  return m;
}

Vector DacParams::vec() const {
  return Eigen::Map<const Vector>(stacked_.data(), stacked_.size());
}

DacParams DacParams::from_vec(int horizon, int du, int dx, const Vector& v) {
  DacParams m(horizon, du, dx);
  SCREAM_REQUIRE(v.size() == m.size(), "vector length mismatch");
  Eigen::Map<Vector>(m.stacked_.data(), m.stacked_.size()) = v;
  return m;
}

DacFeasibleSet::DacFeasibleSet(int horizon, double kappa_B, double kappa, double gamma) {
  SCREAM_REQUIRE(horizon >= 1, "H must be positive");
  SCREAM_REQUIRE(kappa_B > 0.0 && kappa > 0.0, "kappa_B and kappa must be positive");
  SCREAM_REQUIRE(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  const double scale = kappa_B * kappa * kappa * kappa;
  caps.resize(static_cast<std::size_t>(horizon));
  for (int i = 1; i <= horizon; ++i) {
    caps[static_cast<std::size_t>(i - 1)] = scale * std::pow(1.0 - gamma, i);
  }
}

bool DacFeasibleSet::contains(const DacParams& m, double tol) const {
  if (m.horizon() != horizon()) return false;
  for (int i = 1; i <= horizon(); ++i) {
    const Matrix b = m.block(i);
    if (b.norm() <= cap(i)) continue;
    if (operator_norm(b) > cap(i) * (1.0 + tol) + tol) return false;
  }
  return true;
}

DisturbanceWindow::DisturbanceWindow(int capacity, int dimension)
    : capacity_(capacity),
      dimension_(dimension),
      buffer_(static_cast<std::size_t>(capacity), Vector::Zero(dimension)),
      zero_(Vector::Zero(dimension)) {
  SCREAM_REQUIRE(capacity >= 1 && dimension >= 1, "capacity and dimension must be positive");
}

void DisturbanceWindow::push(const Vector& w) {
  SCREAM_REQUIRE(w.size() == dimension_, "disturbance dimension mismatch");
  buffer_[static_cast<std::size_t>(pushed_ % capacity_)] = w;
  ++pushed_;
}

const Vector& DisturbanceWindow::lag(int k) const {
  SCREAM_REQUIRE(k >= 1 && k <= capacity_, "lag outside the window");
  if (k > pushed_) return zero_;
  return buffer_[static_cast<std::size_t>((pushed_ - k) % capacity_)];
}

ClosedLoop::ClosedLoop(const LinearSystem& system, const Matrix& K, int max_power) : K_(K) {
  SCREAM_REQUIRE(K.rows() == system.input_dim() && K.cols() == system.state_dim(),
                 "K must be d_u x d_x");
  SCREAM_REQUIRE(max_power >= 1, "need at least the first power");
  const Matrix a_k = system.A - system.B * K;
  powers_.reserve(static_cast<std::size_t>(max_power + 1));
  powers_.push_back(Matrix::Identity(system.state_dim(), system.state_dim()));
  for (int j = 1; j <= max_power; ++j) powers_.push_back(a_k * powers_.back());
  for (const Matrix& p : powers_) powers_B_.push_back(p * system.B);
}

Vector dac_action(const Matrix& K, const DacParams& M, const Vector& x,
                  const DisturbanceWindow& window) {
  SCREAM_REQUIRE(K.rows() == M.input_dim() && K.cols() == x.size(), "K shape mismatch");
  SCREAM_REQUIRE(window.capacity() >= M.horizon(), "window shorter than H");
  Vector u = -K * x;
  for (int b = 1; b <= M.horizon(); ++b) u.noalias() += M.block(b) * window.lag(b);
  return u;
}

Matrix transfer_matrix(const ClosedLoop& loop, int i, int h, std::span<const DacParams> recent) {
  SCREAM_REQUIRE(h >= 0 && static_cast<int>(recent.size()) >= h + 1,
                 "need M_{t-h}..M_t for the transfer matrix");
  const int H = recent.front().horizon();
  SCREAM_REQUIRE(i >= 0 && i <= H + h, "index outside 0..H+h");
  SCREAM_REQUIRE(loop.max_power() >= std::min(i, h), "closed-loop power cache too short");
  const int n = loop.state_dim();
  Matrix psi = i <= h ? loop.power(i) : Matrix::Zero(n, n);
  for (int j = std::max(0, i - H); j <= std::min(h, i - 1); ++j) {
    psi.noalias() += loop.power_B(j) * recent[static_cast<std::size_t>(j)].block(i - j);
  }
  return psi;
}

Vector state_via_transfer(const ClosedLoop& loop, std::span<const DacParams> params,
                          std::span<const Vector> disturbances, int t) {
  SCREAM_REQUIRE(t >= 0, "round must be non-negative");
  SCREAM_REQUIRE(static_cast<int>(params.size()) >= t && static_cast<int>(disturbances.size()) >= t,
                 "history shorter than t");
  Vector x = Vector::Zero(loop.state_dim());
  if (t == 0) return x;
  const int h = t - 1;
  std::vector<DacParams> recent;
  recent.reserve(static_cast<std::size_t>(t));
  for (int j = 0; j <= h; ++j) recent.push_back(params[static_cast<std::size_t>(h - j)]);
  const int H = params.front().horizon();
  for (int i = 0; i <= h + H; ++i) {
    const int idx = t - 1 - i;
    if (idx < 0) break;
    x.noalias() += transfer_matrix(loop, i, h, recent) * disturbances[static_cast<std::size_t>(idx)];
  }
  return x;
}

ControlCost quadratic_tracking_cost(Vector target, double rho) {
  SCREAM_REQUIRE(rho >= 0.0, "rho must be non-negative");
  ControlCost c;
  c.value = [target, rho](const Vector& x, const Vector& u) {
    return (x - target).squaredNorm() + rho * u.squaredNorm();
  };
  c.grad_x = [target](const Vector& x, const Vector&) -> Vector { return 2.0 * (x - target); };
  c.grad_u = [rho](const Vector&, const Vector& u) -> Vector { return 2.0 * rho * u; };
  return c;
}

TruncatedEvaluation truncated_loss(const ControlCost& cost, const ClosedLoop& loop,
                                   std::span<const DacParams> params,
                                   const DisturbanceWindow& window) {
  SCREAM_REQUIRE(!params.empty(), "empty parameter window");
  const int H = params.front().horizon();
  SCREAM_REQUIRE(static_cast<int>(params.size()) == H + 2, "parameter window must hold H + 2 entries");
  SCREAM_REQUIRE(window.capacity() >= 2 * H + 1, "disturbance window must hold 2H + 1 entries");
  SCREAM_REQUIRE(loop.max_power() >= H, "closed-loop power cache too short");

  // recent[j] = M_{t-1-j}, j = 0..H.
  std::vector<DacParams> recent;
  recent.reserve(static_cast<std::size_t>(H + 1));
  for (int j = 0; j <= H; ++j) recent.push_back(params[static_cast<std::size_t>(H - j)]);

  TruncatedEvaluation out;
  out.y = Vector::Zero(loop.state_dim());
  for (int i = 0; i <= 2 * H; ++i) {
    out.y.noalias() += transfer_matrix(loop, i, H, recent) * window.lag(1 + i);
  }
  out.v = dac_action(loop.K(), params.back(), out.y, window);
  out.value = cost.value(out.y, out.v);
  return out;
}

namespace {

Vector unary_state(const ClosedLoop& loop, const DacParams& M, const DisturbanceWindow& window) {
  const int H = M.horizon();
  Vector y = Vector::Zero(loop.state_dim());
  Vector s(loop.input_dim());
  for (int j = 0; j <= H; ++j) {
    y.noalias() += loop.power(j) * window.lag(1 + j);
    s.setZero();
    for (int b = 1; b <= H; ++b) s.noalias() += M.block(b) * window.lag(1 + j + b);
    y.noalias() += loop.power_B(j) * s;
  }
  return y;
}

}  // namespace

TruncatedEvaluation unary_truncated_loss(const ControlCost& cost, const ClosedLoop& loop,
                                         const DacParams& M, const DisturbanceWindow& window) {
  const int H = M.horizon();
  SCREAM_REQUIRE(window.capacity() >= 2 * H + 1, "disturbance window must hold 2H + 1 entries");
  SCREAM_REQUIRE(loop.max_power() >= H, "closed-loop power cache too short");
  TruncatedEvaluation out;
  out.y = unary_state(loop, M, window);
  out.v = dac_action(loop.K(), M, out.y, window);
  out.value = cost.value(out.y, out.v);
  return out;
}

DacParams finite_difference_gradient(const ControlCost& cost, const ClosedLoop& loop,
                                     const DacParams& M, const DisturbanceWindow& window,
                                     double step) {
  DacParams grad(M.horizon(), M.input_dim(), M.state_dim());
  DacParams probe = M;
  for (Eigen::Index c = 0; c < M.stacked().cols(); ++c) {
    for (Eigen::Index r = 0; r < M.stacked().rows(); ++r) {
      const double original = probe.stacked()(r, c);
      probe.stacked()(r, c) = original + step;
      const double up = unary_truncated_loss(cost, loop, probe, window).value;
      probe.stacked()(r, c) = original - step;
      const double down = unary_truncated_loss(cost, loop, probe, window).value;
      probe.stacked()(r, c) = original;
      grad.stacked()(r, c) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

DacParams unary_truncated_gradient(const ControlCost& cost, const ClosedLoop& loop,
                                   const DacParams& M, const DisturbanceWindow& window) {
  if (!cost.has_gradients()) {
    static std::once_flag warned;
    std::call_once(warned, [] {
      std::cerr << "warning: cost has no gradients; using finite differences\n";
    });
    return finite_difference_gradient(cost, loop, M, window);
  }
  const int H = M.horizon();
  const TruncatedEvaluation eval = unary_truncated_loss(cost, loop, M, window);
  const Vector gx = cost.grad_x(eval.y, eval.v);
  const Vector gu = cost.grad_u(eval.y, eval.v);
  if (!gx.allFinite() || !gu.allFinite()) {
    throw NumericalError("unary_truncated_gradient: non-finite cost gradient");
  }
  // v = -K y + sum_b M[b] w_{t-b}, so y sees gx - K' gu.
  const Vector gy = gx - loop.K().transpose() * gu;
  std::vector<Vector> z;
  z.reserve(static_cast<std::size_t>(H + 1));
  for (int j = 0; j <= H; ++j) z.push_back(loop.power_B(j).transpose() * gy);

  DacParams grad(H, M.input_dim(), M.state_dim());
  for (int b = 1; b <= H; ++b) {
    auto g = grad.block(b);
    g.noalias() = gu * window.lag(b).transpose();
    for (int j = 0; j <= H; ++j) g.noalias() += z[static_cast<std::size_t>(j)] * window.lag(1 + j + b).transpose();
  }
  return grad;
}

UnaryAffineMap unary_affine_map(const ClosedLoop& loop, int horizon,
                                const DisturbanceWindow& window) {
  const int H = horizon;
  const int du = loop.input_dim();
  const int dx = loop.state_dim();
  SCREAM_REQUIRE(window.capacity() >= 2 * H + 1, "disturbance window must hold 2H + 1 entries");
  const Eigen::Index rows = static_cast<Eigen::Index>(H) * du;
  const Eigen::Index n = rows * dx;

  UnaryAffineMap map;
  map.y0 = Vector::Zero(dx);
  for (int j = 0; j <= H; ++j) map.y0.noalias() += loop.power(j) * window.lag(1 + j);
  map.Jy = Matrix::Zero(dx, n);
  Matrix direct = Matrix::Zero(du, n);
  for (int b = 1; b <= H; ++b) {
    for (int c = 0; c < dx; ++c) {
      for (int r = 0; r < du; ++r) {
        const Eigen::Index col = c * rows + static_cast<Eigen::Index>(b - 1) * du + r;
        for (int j = 0; j <= H; ++j) {
          map.Jy.col(col) += loop.power_B(j).col(r) * window.lag(1 + j + b)[c];
        }
        direct(r, col) = window.lag(b)[c];
      }
    }
  }
  map.v0 = -loop.K() * map.y0;
  map.Jv = -loop.K() * map.Jy + direct;
  return map;
}

DacParams project_to_dac_set(const DacParams& M, const DacFeasibleSet& set) {
  SCREAM_REQUIRE(M.horizon() == set.horizon(), "horizon mismatch");
  DacParams out = M;
  for (int i = 1; i <= M.horizon(); ++i) {
    const double cap = set.cap(i);
    const Matrix b = M.block(i);
    if (b.norm() <= cap) continue;
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    if (s(0) <= cap) continue;
    const Vector clipped = s.cwiseMin(cap);
    out.block(i) = svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
  }
  return out;
}

LipschitzConstants lipschitz_constants(const LinearSystem& system,
                                       const StronglyStableController& controller, int horizon,
                                       double cost_gradient, double lambda_multiplier) {
  SCREAM_REQUIRE(horizon >= 1, "H must be positive");
  SCREAM_REQUIRE(cost_gradient > 0.0, "G_c must be positive");
  SCREAM_REQUIRE(lambda_multiplier >= 0.0, "lambda multiplier must be non-negative");
  const double kappa = controller.kappa;
  const double gamma = controller.gamma;
  const double kappa_B = system.kappa_B;
  const double W = system.W;
  SCREAM_REQUIRE(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  const double k3 = kappa * kappa * kappa;
  const double decay = kappa * kappa * std::pow(1.0 - gamma, horizon + 1);
  SCREAM_REQUIRE(decay < 1.0, "kappa^2 (1 - gamma)^{H+1} must be below 1");

  LipschitzConstants c;
  c.tau = kappa_B * k3;
  c.D = W * k3 * (1.0 + horizon * kappa_B * c.tau) / (gamma * (1.0 - decay)) + W * c.tau / gamma;
  c.L_f = 3.0 * std::sqrt(static_cast<double>(horizon)) * cost_gradient * c.D * W * kappa_B * k3;
  const double d = std::min(system.input_dim(), system.state_dim());
  c.G_f = 3.0 * horizon * d * d * cost_gradient * W * kappa_B * k3 / gamma;
  c.D_f = 2.0 * std::sqrt(d) * kappa_B * k3 / gamma;
  c.lambda_theory = (horizon + 2.0) * (horizon + 2.0) * c.L_f;
  c.lambda = c.lambda_theory * lambda_multiplier;
  return c;
}

double state_truncation_bound(const StronglyStableController& controller, int horizon, double D) {
  return controller.kappa * controller.kappa * std::pow(1.0 - controller.gamma, horizon + 1) * D;
}

double loss_truncation_bound(const StronglyStableController& controller, int horizon, double D,
                             double cost_gradient) {
  const double k3 = controller.kappa * controller.kappa * controller.kappa;
  return 2.0 * cost_gradient * D * D * k3 * std::pow(1.0 - controller.gamma, horizon + 1);
}

double transfer_norm_bound(const StronglyStableController& controller, double kappa_B, int horizon,
                           int i) {
  const double k2 = controller.kappa * controller.kappa;
  const double tau = kappa_B * k2 * controller.kappa;
  const double rate = 1.0 - controller.gamma;
  return k2 * std::pow(rate, i) + horizon * kappa_B * k2 * tau * std::pow(rate, i - 1);
}

}  // namespace scream
