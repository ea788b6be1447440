#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace sbdl {

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// On failure the diagonal is loaded once with 1e-10 * trace / n and the
/// factorization retried; a second failure throws SingularPrecision naming
/// `what`.
class SpdFactor {
 public:
  SpdFactor(const Eigen::MatrixXd& precision, const char* what);

  Eigen::Index size() const { return llt_.rows(); }
  bool jittered() const { return jittered_; }

  Eigen::MatrixXd inverse() const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }

  /// log det of the factored matrix.
  double log_det() const;

  /// Solves U x = z with U the upper factor (precision = U^T U). If z is
  /// standard normal, x has covariance precision^{-1}.
  Eigen::VectorXd solve_upper(const Eigen::VectorXd& z) const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool jittered_ = false;
};

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace sbdl
