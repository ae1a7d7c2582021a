#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "scream/lds.hpp"
#include "scream/scream_control.hpp"

namespace scream {

/// Raised when the moment Gram matrix is too close to singular to invert.
/// A longer exploration phase or a larger k usually helps.
class InsufficientExcitation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IdentificationConfig {
  long T0 = 1000;
  int k = 1;
  Matrix K;
};

/// N_j = 1/(T0 - k) sum_{t=0}^{T0-k-1} x_{t+j+1} u~_t' for j = 0..k.
struct MomentEstimates {
  std::vector<Matrix> N;
};

struct IdentifiedSystem {
  Matrix A_hat;
  Matrix B_hat;
  Matrix A_K_hat;
  MomentEstimates moments;
  long T0 = 0;
  int k = 0;
  double ridge = 0.0;  // diagonal ridge added to the Gram matrix, 0 when none
  Trajectory exploration;
  std::vector<Vector> probes;  // the Rademacher inputs u~_t
  // Reporting only.
  double eps_w = 0.0;
  double W0 = 0.0;
  double kappa_c = 0.0;

  LinearSystem as_system(double W) const;
};

/// Smallest k with [B, A_K B, ..., A_K^{k-1} B] of full row rank, A_K = A - BK.
int controllability_index(const Matrix& A, const Matrix& B, const Matrix& K, double tol = 1e-9);

/// ceil(T^{2/3}).
long default_exploration_length(long horizon);

/// Drives the plant for T0 rounds with u_t = -K x_t + u~_t, u~_t uniform on
/// {-1, +1}^{d_u}, and forms the least-squares estimate from the moments.
IdentifiedSystem identify_system(Plant& plant, const IdentificationConfig& config,
                                 std::uint64_t seed);

/// Estimate from already collected moments.
IdentifiedSystem estimate_from_moments(const MomentEstimates& moments, const Matrix& K);

struct PipelineOptions {
  double cost_gradient = 1.0;
  double lambda_multiplier = 1.0;
  std::optional<int> truncation;
  std::optional<LinearSystem> injected_model;  // replaces the estimate after exploration
  std::uint64_t seed = 0;
};

struct PipelineResult {
  IdentifiedSystem identified;
  LinearSystem model;  // system the controller was built on
  ControlConfig config;
  std::vector<double> exploration_costs;
  ControlRun phase2;
  double exploration_cost = 0.0;
  double phase2_cost = 0.0;
  double total_cost = 0.0;
};

/// Explore for T0 rounds, estimate (A, B), then run Scream.Control on the
/// estimate for the remaining T - T0 rounds while costs accrue on the plant.
PipelineResult run_unknown_pipeline(Plant& plant, const IdentificationConfig& id, long horizon,
                                    const CostStream& costs, const PipelineOptions& options);

}  // namespace scream
