#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace sbdl {

struct SparseCode {
  std::vector<Eigen::Index> support;  // selection order
  Eigen::VectorXd coeffs;             // aligned with support
  double residual_norm = 0.0;
  bool dictionary_normalized = false;  // atoms were not unit norm and got rescaled
};

/// At least one of the two criteria must be set.
struct OmpStop {
  std::optional<Eigen::Index> max_sparsity;
  std::optional<double> residual_threshold;
};

/// Greedy orthogonal matching pursuit. Picks the atom with the largest
/// |correlation| with the residual (ties to the lowest index), refits all
/// coefficients on the support by least squares, and stops on the residual
/// threshold, the sparsity cap, or a stalled residual.
SparseCode omp_encode(const Eigen::MatrixXd& dict, const Eigen::VectorXd& y, const OmpStop& stop);

std::vector<SparseCode> batch_encode(const Eigen::MatrixXd& dict, const Eigen::MatrixXd& signals,
                                     const OmpStop& stop);

/// Dense N-vector form of a code.
Eigen::VectorXd to_dense(const SparseCode& code, Eigen::Index num_atoms);

}  // namespace sbdl
