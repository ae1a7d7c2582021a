#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "scream/oco.hpp"
#include "scream/types.hpp"

namespace scream {

/// Euclidean projection onto the origin-centred ball of radius `radius`.
template <typename Derived>
VectorX<typename Derived::Scalar> project_to_ball(const Eigen::MatrixBase<Derived>& x,
                                                 typename Derived::Scalar radius) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = x.norm();
  if (norm <= radius) return x;
  return x * (radius / norm);
}

/// Multiplicative-weights update p_i <- p_i exp(-rate * loss_i) / Z, carried
/// out on log-weights with a max shift so large rate*loss never underflows
/// the whole vector. Zero weights stay exactly zero.
template <typename DerivedP, typename DerivedL>
VectorX<typename DerivedP::Scalar> hedge_update(const Eigen::MatrixBase<DerivedP>& p,
                                               const Eigen::MatrixBase<DerivedL>& losses,
                                               typename DerivedP::Scalar rate) {
  using Scalar = typename DerivedP::Scalar;
  const Eigen::Index n = p.size();
  VectorX<Scalar> logw(n);
  Scalar shift = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    logw[i] = p[i] > Scalar(0) ? std::log(p[i]) - rate * losses[i]
                               : -std::numeric_limits<Scalar>::infinity();
    shift = std::max(shift, logw[i]);
  }
  VectorX<Scalar> out(n);
  Scalar total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = std::exp(logw[i] - shift);
    total += out[i];
  }
  return out / total;
}

struct Simplex {
  int size = 1;
};

enum class Regularizer { Euclidean, NegativeEntropy };

/// Point and step size of an online-mirror-descent learner. For the
/// Euclidean geometry the point lives in a DomainBall; for negative entropy
/// it is a probability vector.
struct OmdState {
  Vector point;
  double rate = 0.0;
};

using OmdDomain = std::variant<DomainBall, Simplex>;

OmdState ogd_step(const OmdState& state, const Vector& gradient, const DomainBall& domain);
OmdState hedge_step(const OmdState& state, const Vector& losses);

/// Single mirror-descent step; dispatches on the regularizer. Euclidean needs
/// a DomainBall and NegativeEntropy needs a Simplex.
OmdState omd_step(const OmdState& state, const Vector& gradient, Regularizer regularizer,
                  const OmdDomain& domain);

bool on_simplex(const Vector& p, double tol = 1e-12);

}  // namespace scream
