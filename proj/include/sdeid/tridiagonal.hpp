#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <string>

#include "sdeid/errors.hpp"

namespace sdeid {

/// Thomas algorithm for lower(i) x(i-1) + diag(i) x(i) + upper(i) x(i+1) = rhs(i).
/// lower(0) and upper(n-1) are ignored. Throws NumericalError on a
/// vanishing pivot.
template <typename Scalar>
void solve_tridiagonal(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lower,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& diag,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& upper,
                       Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rhs_in_solution_out,
                       Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& scratch) {
  const Eigen::Index n = diag.size();
  auto& x = rhs_in_solution_out;
  scratch.resize(n);
  const Scalar tiny = std::numeric_limits<Scalar>::min() * 1e4;
  Scalar pivot = diag(0);
  if (!(std::abs(pivot) > tiny)) throw NumericalError("tridiagonal solve: singular pivot at row 0");
  x(0) /= pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    scratch(i) = upper(i - 1) / pivot;
    pivot = diag(i) - lower(i) * scratch(i);
    if (!(std::abs(pivot) > tiny) || !std::isfinite(pivot)) {
      throw NumericalError("tridiagonal solve: singular pivot at row " + std::to_string(i));
    }
    x(i) = (x(i) - lower(i) * x(i - 1)) / pivot;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) -= scratch(i + 1) * x(i + 1);
}

}  // namespace sdeid
