#include "sbdl/omp.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "sbdl/error.hpp"

namespace sbdl {
namespace {

void check_stop(const OmpStop& stop) {
  if (!stop.max_sparsity && !stop.residual_threshold) {
    throw Error(ErrorCode::InvalidArgument, "OmpStop needs max_sparsity or residual_threshold");
  }
  if (stop.max_sparsity && *stop.max_sparsity < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_sparsity must be positive");
  }
  if (stop.residual_threshold && !(*stop.residual_threshold >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "residual_threshold must be non-negative");
  }
}

// Unit-norm copy of the dictionary plus the scale that maps coefficients on
// the normalized atoms back to the caller's atoms.
class Encoder {
 public:
  explicit Encoder(const Eigen::MatrixXd& dict) : norms_(dict.colwise().norm().transpose()) {
    normalized_ = ((norms_.array() - 1.0).abs() > 1e-6).any();
    atoms_ = dict;
    for (Eigen::Index n = 0; n < atoms_.cols(); ++n) {
      if (norms_[n] > 0.0) atoms_.col(n) /= norms_[n];
    }
  }

  SparseCode encode(const Eigen::VectorXd& y, const OmpStop& stop) const {
    if (y.size() != atoms_.rows()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "signal length " + std::to_string(y.size()) + " vs dictionary rows " +
                      std::to_string(atoms_.rows()));
    }
    const Eigen::Index num_atoms = atoms_.cols();
    const Eigen::Index cap =
        std::min({stop.max_sparsity.value_or(num_atoms), num_atoms, atoms_.rows()});
    const double threshold = stop.residual_threshold.value_or(0.0);

    SparseCode code;
    code.dictionary_normalized = normalized_;
    Eigen::VectorXd residual = y;
    double residual_norm = y.norm();
    std::vector<bool> used(static_cast<std::size_t>(num_atoms), false);
    // Lower Cholesky factor of the support Gram matrix, grown one row per pick.
    Eigen::MatrixXd chol(cap, cap);
    Eigen::VectorXd projections(cap);
    Eigen::VectorXd coeffs;

    while (residual_norm > threshold && static_cast<Eigen::Index>(code.support.size()) < cap) {
      const Eigen::VectorXd corr = atoms_.transpose() * residual;
      Eigen::Index best = -1;
      double best_abs = 0.0;
      for (Eigen::Index n = 0; n < num_atoms; ++n) {
        if (used[static_cast<std::size_t>(n)] || norms_[n] == 0.0) continue;
        if (const double v = std::abs(corr[n]); v > best_abs) {
          best = n;
          best_abs = v;
        }
      }
      if (best < 0) break;

      const auto k = static_cast<Eigen::Index>(code.support.size());
      Eigen::VectorXd cross(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        cross[i] = atoms_.col(code.support[static_cast<std::size_t>(i)]).dot(atoms_.col(best));
      }
      Eigen::VectorXd w = cross;
      if (k > 0) chol.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(w);
      const double pivot = 1.0 - w.squaredNorm();
      if (!(pivot > 1e-12)) break;  // new atom is in the span of the support

      chol.block(k, 0, 1, k) = w.transpose();
      chol(k, k) = std::sqrt(pivot);
      projections[k] = atoms_.col(best).dot(y);
      const auto lower = chol.topLeftCorner(k + 1, k + 1).triangularView<Eigen::Lower>();
      Eigen::VectorXd trial = lower.solve(projections.head(k + 1));
      lower.transpose().solveInPlace(trial);

      Eigen::VectorXd trial_residual = y;
      for (Eigen::Index i = 0; i <= k; ++i) {
        const Eigen::Index atom = i < k ? code.support[static_cast<std::size_t>(i)] : best;
        trial_residual -= trial[i] * atoms_.col(atom);
      }
      const double trial_norm = trial_residual.norm();
      if (residual_norm - trial_norm <= 1e-12 * residual_norm) break;

      code.support.push_back(best);
      used[static_cast<std::size_t>(best)] = true;
      coeffs = std::move(trial);
      residual = std::move(trial_residual);
      residual_norm = trial_norm;
    }

    code.coeffs = coeffs.size() ? coeffs : Eigen::VectorXd();
    for (Eigen::Index i = 0; i < code.coeffs.size(); ++i) {
      code.coeffs[i] /= norms_[code.support[static_cast<std::size_t>(i)]];
    }
    code.residual_norm = residual_norm;
    return code;
  }

 private:
  Eigen::VectorXd norms_;
  Eigen::MatrixXd atoms_;
  bool normalized_ = false;
};

}  // namespace

SparseCode omp_encode(const Eigen::MatrixXd& dict, const Eigen::VectorXd& y, const OmpStop& stop) {
  check_stop(stop);
  return Encoder(dict).encode(y, stop);
}

std::vector<SparseCode> batch_encode(const Eigen::MatrixXd& dict, const Eigen::MatrixXd& signals,
                                     const OmpStop& stop) {
  check_stop(stop);
  if (signals.rows() != dict.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "signal rows " + std::to_string(signals.rows()) + " vs dictionary rows " +
                    std::to_string(dict.rows()));
  }
  const Encoder encoder(dict);
  std::vector<SparseCode> codes;
  codes.reserve(static_cast<std::size_t>(signals.cols()));
  for (Eigen::Index p = 0; p < signals.cols(); ++p) {
    codes.push_back(encoder.encode(signals.col(p), stop));
  }
  return codes;
}

Eigen::VectorXd to_dense(const SparseCode& code, Eigen::Index num_atoms) {
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(num_atoms);
  for (std::size_t i = 0; i < code.support.size(); ++i) {
    dense[code.support[i]] = code.coeffs[static_cast<Eigen::Index>(i)];
  }
  return dense;
}

}  // namespace sbdl
