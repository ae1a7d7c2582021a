#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace scream {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Thrown when a caller breaks an operation's precondition (shape, length,
/// range). These are programming errors, not data-dependent failures.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation produces non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SCREAM_REQUIRE(cond, msg)                                              \
  do {                                                                         \
    if (!(cond)) {                                                             \
      throw ::scream::ContractViolation(std::string(__func__) + ": " + (msg)); \
    }                                                                          \
  } while (0)

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

}  // namespace scream
