#include "scream/sysid.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <random>

namespace scream {

LinearSystem IdentifiedSystem::as_system(double W) const { return LinearSystem(A_hat, B_hat, W); }

int controllability_index(const Matrix& A, const Matrix& B, const Matrix& K, double tol) {
  SCREAM_REQUIRE(A.rows() == A.cols() && B.rows() == A.rows(), "A, B shape mismatch");
  SCREAM_REQUIRE(K.rows() == B.cols() && K.cols() == A.cols(), "K must be d_u x d_x");
  const Matrix a_k = A - B * K;
  const auto n = A.rows();
  Matrix blocks = B;
  Matrix power_b = B;
  for (int k = 1; k <= n; ++k) {
    Eigen::JacobiSVD<Matrix> svd(blocks);
    svd.setThreshold(tol);
    if (svd.rank() == n) return k;
    power_b = a_k * power_b;
    Matrix grown(n, blocks.cols() + B.cols());
    grown << blocks, power_b;
    blocks = std::move(grown);
  }
  throw ContractViolation("controllability_index: (A - BK, B) is not controllable");
}

long default_exploration_length(long horizon) {
  SCREAM_REQUIRE(horizon >= 1, "horizon must be positive");
  return static_cast<long>(std::ceil(std::pow(static_cast<double>(horizon), 2.0 / 3.0) - 1e-9));
}

IdentifiedSystem estimate_from_moments(const MomentEstimates& moments, const Matrix& K) {
  const int k = static_cast<int>(moments.N.size()) - 1;
  SCREAM_REQUIRE(k >= 1, "need N_0..N_k with k >= 1");
  const Matrix& n0 = moments.N.front();
  const auto dx = n0.rows();
  const auto du = n0.cols();
  for (const Matrix& n : moments.N) {
    if (!n.allFinite()) throw NumericalError("estimate_from_moments: non-finite moment");
  }
  Matrix c0(dx, du * k);
  Matrix c1(dx, du * k);
  for (int j = 0; j < k; ++j) {
    c0.middleCols(j * du, du) = moments.N[static_cast<std::size_t>(j)];
    c1.middleCols(j * du, du) = moments.N[static_cast<std::size_t>(j + 1)];
  }
  Matrix gram = c0 * c0.transpose();
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues();
  const double top = ev.maxCoeff();
  const double bottom = ev.minCoeff();
  if (!(top > 0.0) || bottom / top < 1e-14) {
    throw InsufficientExcitation(
        "identify_system: moment Gram matrix is singular; increase T0 or k");
  }
  IdentifiedSystem out;
  if (top / bottom > 1e12) {
    out.ridge = 1e-10;
    gram.diagonal().array() += out.ridge;
  }
  // A_K = C1 C0' (C0 C0')^{-1}; solve with the symmetric Gram on the right.
  const Matrix rhs = c0 * c1.transpose();
  out.A_K_hat = gram.ldlt().solve(rhs).transpose();
  out.B_hat = n0;
  out.A_hat = out.A_K_hat + out.B_hat * K;
  out.moments = moments;
  out.k = k;
  return out;
}

IdentifiedSystem identify_system(Plant& plant, const IdentificationConfig& config,
                                 std::uint64_t seed) {
  const int dx = plant.system().state_dim();
  const int du = plant.system().input_dim();
  SCREAM_REQUIRE(config.k >= 1 && config.T0 > config.k, "need T0 > k >= 1");
  SCREAM_REQUIRE(config.K.rows() == du && config.K.cols() == dx, "K must be d_u x d_x");

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Trajectory traj;
  std::vector<Vector> probes;
  traj.states.push_back(plant.state());
  for (long t = 0; t < config.T0; ++t) {
    Vector probe(du);
    for (int i = 0; i < du; ++i) probe[i] = coin(rng) ? 1.0 : -1.0;
    const Vector u = -config.K * plant.state() + probe;
    const Vector x_next = plant.step(u);
    traj.actions.push_back(u);
    traj.disturbances.push_back(plant.last_disturbance());
    traj.states.push_back(x_next);
    probes.push_back(std::move(probe));
  }

  MomentEstimates moments;
  const long count = config.T0 - config.k;
  for (int j = 0; j <= config.k; ++j) {
    Matrix n = Matrix::Zero(dx, du);
    for (long t = 0; t < count; ++t) {
      n.noalias() += traj.states[static_cast<std::size_t>(t + j + 1)] *
                     probes[static_cast<std::size_t>(t)].transpose();
    }
    moments.N.push_back(n / static_cast<double>(count));
  }
  IdentifiedSystem out = estimate_from_moments(moments, config.K);
  out.T0 = config.T0;
  out.exploration = std::move(traj);
  out.probes = std::move(probes);
  double w0 = 0.0;
  for (const Vector& x : out.exploration.states) w0 = std::max(w0, x.norm());
  out.W0 = w0;
  out.eps_w = std::max((out.A_hat - plant.system().A).norm(), (out.B_hat - plant.system().B).norm());
  Matrix reach(dx, du * config.k);
  Matrix power_b = plant.system().B;
  const Matrix a_k = plant.system().A - plant.system().B * config.K;
  for (int j = 0; j < config.k; ++j) {
    reach.middleCols(j * du, du) = power_b;
    power_b = a_k * power_b;
  }
  Eigen::JacobiSVD<Matrix> svd(reach);
  const Vector& sv = svd.singularValues();
  out.kappa_c = sv(sv.size() - 1) > 0.0 ? 1.0 / sv(sv.size() - 1) : INFINITY;
  return out;
}

PipelineResult run_unknown_pipeline(Plant& plant, const IdentificationConfig& id, long horizon,
                                    const CostStream& costs, const PipelineOptions& options) {
  SCREAM_REQUIRE(id.T0 < horizon, "exploration must be shorter than the horizon");
  PipelineResult result;
  result.identified = identify_system(plant, id, options.seed);
  const Trajectory& explore = result.identified.exploration;
  for (std::size_t t = 0; t < explore.actions.size(); ++t) {
    result.exploration_costs.push_back(
        costs(static_cast<int>(t)).value(explore.states[t], explore.actions[t]));
    result.exploration_cost += result.exploration_costs.back();
  }

  result.model = options.injected_model ? *options.injected_model
                                        : result.identified.as_system(plant.system().W);
  const StronglyStableController controller = certify(result.model, id.K);
  const long remaining = horizon - id.T0;
  result.config = make_control_config(result.model, controller, remaining, options.cost_gradient,
                                      options.lambda_multiplier, options.truncation);
  ScreamController learner(result.config, result.model);
  result.phase2 = run_controller(learner, plant, costs, remaining, static_cast<int>(id.T0));
  result.phase2_cost = result.phase2.total_cost();
  result.total_cost = result.exploration_cost + result.phase2_cost;
  return result;
}

}  // namespace scream
