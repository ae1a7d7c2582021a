#include "scream/lds.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

namespace scream {

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

namespace {

double complex_operator_norm(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

Vector uniform_in_ball(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  const double scale = radius * std::pow(unit(rng), 1.0 / dim) / v.norm();
  return v * scale;
}

Vector unit_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v / v.norm();
}

}  // namespace

LinearSystem::LinearSystem(Matrix a, Matrix b, double disturbance_bound)
    : A(std::move(a)), B(std::move(b)), W(disturbance_bound) {
  SCREAM_REQUIRE(A.rows() == A.cols(), "A must be square");
  SCREAM_REQUIRE(B.rows() == A.rows(), "B must have as many rows as A");
  SCREAM_REQUIRE(W >= 0.0, "disturbance bound must be non-negative");
  kappa_A = operator_norm(A);
  kappa_B = operator_norm(B);
}

bool LinearSystem::norms_within_bounds(double tol) const {
  return operator_norm(A) <= kappa_A + tol && operator_norm(B) <= kappa_B + tol;
}

Vector step_dynamics(const LinearSystem& system, const Vector& x, const Vector& u, const Vector& w) {
  SCREAM_REQUIRE(x.size() == system.state_dim(), "state dimension mismatch");
  SCREAM_REQUIRE(u.size() == system.input_dim(), "input dimension mismatch");
  SCREAM_REQUIRE(w.size() == system.state_dim(), "disturbance dimension mismatch");
  return system.A * x + system.B * u + w;
}

Vector recover_disturbance(const LinearSystem& system, const Vector& x_next, const Vector& x,
                           const Vector& u) {
  SCREAM_REQUIRE(x.size() == system.state_dim() && x_next.size() == system.state_dim(),
                 "state dimension mismatch");
  SCREAM_REQUIRE(u.size() == system.input_dim(), "input dimension mismatch");
  return x_next - system.A * x - system.B * u;
}

DisturbanceKind parse_disturbance_kind(const std::string& name) {
  if (name == "constant") return DisturbanceKind::Constant;
  if (name == "gaussian" || name == "gaussian-clipped") return DisturbanceKind::GaussianClipped;
  if (name == "sinusoidal") return DisturbanceKind::Sinusoidal;
  if (name == "piecewise" || name == "piecewise-step") return DisturbanceKind::PiecewiseStep;
  if (name == "adversarial" || name == "adversarial-sign") return DisturbanceKind::AdversarialSign;
  throw ContractViolation("unknown disturbance kind: " + name);
}

std::string to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::Constant: return "constant";
    case DisturbanceKind::GaussianClipped: return "gaussian-clipped";
    case DisturbanceKind::Sinusoidal: return "sinusoidal";
    case DisturbanceKind::PiecewiseStep: return "piecewise-step";
    case DisturbanceKind::AdversarialSign: return "adversarial-sign";
  }
  return "unknown";
}

DisturbanceGenerator::DisturbanceGenerator(DisturbanceKind kind, int dimension, double bound,
                                           double amplitude, std::uint64_t seed, Vector offset,
                                           int period)
    : kind_(kind),
      dimension_(dimension),
      bound_(bound),
      amplitude_(amplitude),
      offset_(offset.size() == 0 ? Vector::Zero(dimension) : std::move(offset)),
      period_(period),
      rng_(seed) {
  SCREAM_REQUIRE(dimension > 0, "dimension must be positive");
  SCREAM_REQUIRE(bound >= 0.0 && amplitude >= 0.0, "bound and amplitude must be non-negative");
  SCREAM_REQUIRE(offset_.size() == dimension, "offset dimension mismatch");
  SCREAM_REQUIRE(period > 0, "period must be positive");
  direction_ = unit_direction(rng_, dimension);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  phase_.resize(dimension);
  for (int i = 0; i < dimension; ++i) phase_[i] = angle(rng_);
  level_ = Vector::Zero(dimension);
}

Vector DisturbanceGenerator::clip(Vector w) const {
  const double norm = w.norm();
  if (norm > bound_) w *= bound_ / norm;
  return w;
}

Vector DisturbanceGenerator::sample(int t, const Vector& state) {
  Vector w = offset_;
  switch (kind_) {
    case DisturbanceKind::Constant:
      w += amplitude_ * direction_;
      break;
    case DisturbanceKind::GaussianClipped: {
      std::normal_distribution<double> normal;
      for (int i = 0; i < dimension_; ++i) w[i] += amplitude_ * normal(rng_);
      break;
    }
    case DisturbanceKind::Sinusoidal: {
      const double omega = 2.0 * std::numbers::pi / period_;
      const double scale = amplitude_ / std::sqrt(static_cast<double>(dimension_));
      for (int i = 0; i < dimension_; ++i) w[i] += scale * std::sin(omega * t + phase_[i]);
      break;
    }
    case DisturbanceKind::PiecewiseStep:
      if (t % period_ == 0) level_ = uniform_in_ball(rng_, dimension_, amplitude_);
      w += level_;
      break;
    case DisturbanceKind::AdversarialSign: {
      SCREAM_REQUIRE(state.size() == dimension_, "state dimension mismatch");
      const double scale = amplitude_ / std::sqrt(static_cast<double>(dimension_));
      for (int i = 0; i < dimension_; ++i) w[i] += state[i] >= 0.0 ? scale : -scale;
      break;
    }
  }
  return clip(std::move(w));
}

namespace {

struct Eigendecomposition {
  bool ok = false;
  std::string reason;
  ComplexMatrix V;
  ComplexMatrix V_inv;
  Eigen::VectorXcd values;
};

Eigendecomposition decompose(const Matrix& closed_loop) {
  Eigendecomposition out;
  Eigen::EigenSolver<Matrix> solver(closed_loop);
  if (solver.info() != Eigen::Success) {
    out.reason = "eigendecomposition failed";
    return out;
  }
  out.V = solver.eigenvectors();
  out.values = solver.eigenvalues();
  Eigen::JacobiSVD<ComplexMatrix> svd(out.V);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    out.reason = "closed loop is defective (eigenvector matrix is singular)";
    return out;
  }
  out.V_inv = out.V.inverse();
  const ComplexMatrix rebuilt = out.V * out.values.asDiagonal() * out.V_inv;
  const double scale = std::max(1.0, closed_loop.norm());
  if ((rebuilt - closed_loop.cast<std::complex<double>>()).norm() > 1e-8 * scale) {
    out.reason = "closed loop is defective (reconstruction failed)";
    return out;
  }
  out.ok = true;
  return out;
}

StronglyStableController build_certificate(const Matrix& K, const Eigendecomposition& eig) {
  StronglyStableController c;
  c.K = K;
  const double nv = complex_operator_norm(eig.V);
  const double nvi = complex_operator_norm(eig.V_inv);
  const double s = std::sqrt(nvi / nv);
  c.H = s * eig.V;
  c.H_inv = eig.V_inv / s;
  c.L = eig.values.asDiagonal();
  const double radius = eig.values.cwiseAbs().maxCoeff();
  c.kappa = std::max({operator_norm(K), std::sqrt(nv * nvi), 1.0});
  c.gamma = 1.0 - radius;
  return c;
}

}  // namespace

StabilityCheck check_strong_stability(const LinearSystem& system, const Matrix& K, double kappa,
                                      double gamma) {
  SCREAM_REQUIRE(K.rows() == system.input_dim() && K.cols() == system.state_dim(),
                 "K must be d_u x d_x");
  SCREAM_REQUIRE(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  SCREAM_REQUIRE(kappa > 0.0, "kappa must be positive");
  StabilityCheck check;
  const Eigendecomposition eig = decompose(system.A - system.B * K);
  if (!eig.ok) {
    check.status = StabilityStatus::Defective;
    check.reason = eig.reason;
    return check;
  }
  check.certificate = build_certificate(K, eig);
  check.certificate.kappa = kappa;
  check.certificate.gamma = gamma;

  const double tol = 1e-10;
  const double l_norm = eig.values.cwiseAbs().maxCoeff();
  const double h_norm = complex_operator_norm(check.certificate.H);
  const double h_inv_norm = complex_operator_norm(check.certificate.H_inv);
  if (l_norm > 1.0 - gamma + tol) {
    check.reason = "spectral radius exceeds 1 - gamma";
  } else if (operator_norm(K) > kappa + tol) {
    check.reason = "||K|| exceeds kappa";
  } else if (h_norm > kappa + tol || h_inv_norm > kappa + tol) {
    check.reason = "similarity transform norm exceeds kappa";
  } else {
    check.status = StabilityStatus::Accepted;
  }
  return check;
}

StronglyStableController certify(const LinearSystem& system, const Matrix& K) {
  const Eigendecomposition eig = decompose(system.A - system.B * K);
  if (!eig.ok) throw NumericalError("certify: " + eig.reason);
  StronglyStableController c = build_certificate(K, eig);
  if (c.gamma <= 0.0) throw NumericalError("certify: closed loop is not strictly stable");
  return c;
}

double Trajectory::max_residual(const LinearSystem& system) const {
  double worst = 0.0;
  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    const Vector r = states[t + 1] - step_dynamics(system, states[t], actions[t], disturbances[t]);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

Plant::Plant(LinearSystem system, DisturbanceGenerator disturbances)
    : system_(std::move(system)),
      disturbances_(std::move(disturbances)),
      x_(Vector::Zero(system_.state_dim())),
      w_(Vector::Zero(system_.state_dim())) {
  SCREAM_REQUIRE(disturbances_.dimension() == system_.state_dim(),
                 "disturbance dimension must match the state");
}

const Vector& Plant::step(const Vector& u) {
  w_ = disturbances_.sample(round_, x_);
  x_ = step_dynamics(system_, x_, u, w_);
  ++round_;
  return x_;
}

LinearSystem random_symmetric_system(int dx, int du, double radius, double W, std::uint64_t seed) {
  SCREAM_REQUIRE(dx > 0 && du > 0, "dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> eig(-radius, radius);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  Matrix g(dx, dx);
  for (int i = 0; i < dx; ++i)
    for (int j = 0; j < dx; ++j) g(i, j) = normal(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector lambda(dx);
  for (int i = 0; i < dx; ++i) lambda[i] = eig(rng);
  lambda[0] = radius;
  Matrix a = q * lambda.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose());
  Matrix b(dx, du);
  for (int i = 0; i < dx; ++i)
    for (int j = 0; j < du; ++j) b(i, j) = entry(rng);
  b /= operator_norm(b);
  return LinearSystem(a, b, W);
}

LinearSystem random_diagonalizable_system(int dx, int du, double radius, double W,
                                          std::uint64_t seed) {
  SCREAM_REQUIRE(dx > 0 && du > 0, "dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eig(-radius, radius);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  Matrix v = Matrix::Identity(dx, dx);
  for (int i = 0; i < dx; ++i)
    for (int j = 0; j < dx; ++j) v(i, j) += 0.05 * entry(rng);
  Vector lambda(dx);
  for (int i = 0; i < dx; ++i) lambda[i] = eig(rng);
  lambda[0] = radius;
  const Matrix a = v * lambda.asDiagonal() * v.inverse();
  Matrix b(dx, du);
  for (int i = 0; i < dx; ++i)
    for (int j = 0; j < du; ++j) b(i, j) = entry(rng);
  b /= operator_norm(b);
  return LinearSystem(a, b, W);
}

std::vector<std::string> preset_names() { return {"scalar", "stable3x2", "tracking", "nonnormal3x2"}; }

ScenarioPreset make_preset(const std::string& name, std::uint64_t seed, double W,
                           std::optional<std::uint64_t> noise) {
  ScenarioPreset preset;
  preset.name = name;
  const std::uint64_t noise_seed = noise.value_or(seed ^ 0x9e3779b97f4a7c15ULL);
  if (name == "scalar") {
    preset.system = LinearSystem(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0), W);
    preset.disturbances =
        DisturbanceGenerator(DisturbanceKind::GaussianClipped, 1, W, 0.3 * W, noise_seed);
  } else if (name == "stable3x2") {
    preset.system = random_symmetric_system(3, 2, 0.9, W, seed);
    preset.disturbances =
        DisturbanceGenerator(DisturbanceKind::GaussianClipped, 3, W, 0.5 * W, noise_seed);
  } else if (name == "tracking") {
    preset.system = random_symmetric_system(3, 2, 0.5, W, seed);
    std::mt19937_64 rng(noise_seed);
    const Vector mean = 0.5 * W * unit_direction(rng, 3);
    preset.disturbances = DisturbanceGenerator(DisturbanceKind::GaussianClipped, 3, W, 0.2 * W,
                                               noise_seed + 1, mean);
  } else if (name == "nonnormal3x2") {
    preset.system = random_diagonalizable_system(3, 2, 0.8, W, seed);
    preset.disturbances =
        DisturbanceGenerator(DisturbanceKind::Sinusoidal, 3, W, 0.8 * W, noise_seed, {}, 40);
  } else {
    throw ContractViolation("unknown preset: " + name);
  }
  const Matrix K = Matrix::Zero(preset.system.input_dim(), preset.system.state_dim());
  preset.controller = certify(preset.system, K);
  return preset;
}

}  // namespace scream
