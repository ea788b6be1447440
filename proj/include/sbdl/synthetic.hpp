#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Core>

namespace sbdl {

struct Sparsity {
  Eigen::Index k_min = 3;
  Eigen::Index k_max = 3;

  static Sparsity fixed(Eigen::Index k) { return {k, k}; }
  static Sparsity uniform_range(Eigen::Index lo, Eigen::Index hi) { return {lo, hi}; }
  bool is_fixed() const { return k_min == k_max; }
};

struct SyntheticSpec {
  Eigen::Index M = 20;
  Eigen::Index N = 50;
  Eigen::Index L = 1000;
  Sparsity sparsity = Sparsity::fixed(3);
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Eigen::MatrixXd D_true;  // M x N, unit-norm columns
  Eigen::MatrixXd X_true;  // N x L, K_l nonzeros per column
  Eigen::MatrixXd Y;       // M x L
  double sigma = 0.0;
};

/// Per-entry noise std giving the requested SNR:
/// sqrt((||clean||_F^2 / (M L)) / 10^(snr_db / 10)).
double snr_to_noise_std(const Eigen::MatrixXd& clean, double snr_db);

/// Draw order (fixed for reproducibility): dictionary entries column-major;
/// then per signal its sparsity, support and coefficients; then the noise.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace sbdl
