#include "sbdl/linalg.hpp"

#include <cmath>
#include <string>

#include "sbdl/error.hpp"

namespace sbdl {

SpdFactor::SpdFactor(const Eigen::MatrixXd& precision, const char* what) : llt_(precision) {
  if (llt_.info() == Eigen::Success && llt_.matrixLLT().diagonal().allFinite()) return;
  const double n = static_cast<double>(precision.rows());
  const double jitter = 1e-10 * std::abs(precision.trace()) / n;
  Eigen::MatrixXd loaded = precision;
  loaded.diagonal().array() += jitter;
  llt_.compute(loaded);
  jittered_ = true;
  if (llt_.info() != Eigen::Success || !llt_.matrixLLT().diagonal().allFinite()) {
    throw Error(ErrorCode::SingularPrecision,
                std::string(what) + " is not positive definite after jitter");
  }
}

Eigen::MatrixXd SpdFactor::inverse() const {
  const Eigen::Index n = size();
  return symmetrized(llt_.solve(Eigen::MatrixXd::Identity(n, n)));
}

double SpdFactor::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd SpdFactor::solve_upper(const Eigen::VectorXd& z) const {
  return llt_.matrixU().solve(z);
}

}  // namespace sbdl
