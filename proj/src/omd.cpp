#include "scream/omd.hpp"

#include <cmath>
#include <string>

namespace scream {

OmdState ogd_step(const OmdState& state, const Vector& gradient, const DomainBall& domain) {
  SCREAM_REQUIRE(gradient.size() == state.point.size(), "gradient dimension mismatch");
  SCREAM_REQUIRE(state.point.size() == domain.dimension, "point dimension mismatch");
  if (!gradient.allFinite()) throw NumericalError("ogd_step: non-finite gradient");
  return {project_to_ball(state.point - state.rate * gradient, domain.radius()), state.rate};
}

OmdState hedge_step(const OmdState& state, const Vector& losses) {
  SCREAM_REQUIRE(losses.size() == state.point.size(), "loss vector length mismatch");
  if (!losses.allFinite()) throw NumericalError("hedge_step: non-finite loss");
  return {hedge_update(state.point, losses, state.rate), state.rate};
}

OmdState omd_step(const OmdState& state, const Vector& gradient, Regularizer regularizer,
                  const OmdDomain& domain) {
  switch (regularizer) {
    case Regularizer::Euclidean:
      SCREAM_REQUIRE(std::holds_alternative<DomainBall>(domain),
                     "Euclidean regularizer needs a ball domain");
      return ogd_step(state, gradient, std::get<DomainBall>(domain));
    case Regularizer::NegativeEntropy:
      SCREAM_REQUIRE(std::holds_alternative<Simplex>(domain),
                     "negative entropy needs a simplex domain");
      SCREAM_REQUIRE(std::get<Simplex>(domain).size == state.point.size(), "simplex size mismatch");
      return hedge_step(state, gradient);
  }
  throw ContractViolation("omd_step: unknown regularizer");
}

bool on_simplex(const Vector& p, double tol) {
  return p.size() > 0 && p.allFinite() && p.minCoeff() >= 0.0 && std::abs(p.sum() - 1.0) <= tol;
}

}  // namespace scream
