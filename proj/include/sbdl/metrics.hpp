#pragma once

#include <vector>

#include <Eigen/Core>

namespace sbdl {

/// Success threshold on atom_distance used by the recovery benchmark.
inline constexpr double kRecoveryThreshold = 0.01;

struct MatchedPair {
  Eigen::Index true_index = 0;
  Eigen::Index learned_index = 0;
  double distance = 0.0;
};

struct RecoveryReport {
  std::vector<MatchedPair> matched_pairs;
  double success_rate = 0.0;
  double threshold = kRecoveryThreshold;
};

/// 1 - |d^T dhat| / (||d|| ||dhat||), in [0, 1].
double atom_distance(const Eigen::VectorXd& d, const Eigen::VectorXd& dhat);

/// Greedy matching without replacement: repeatedly takes the globally
/// closest remaining (true, learned) pair. Ties resolve to the lower true
/// index, then the lower learned index.
RecoveryReport match_and_score(const Eigen::MatrixXd& true_dict, const Eigen::MatrixXd& learned,
                               double threshold = kRecoveryThreshold);

/// 20 log10(255 Q^2 / ||test - clean||_F) for Q x Q images; +inf when equal.
double psnr(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& test);

/// Conventional 10 log10(255^2 / MSE); +inf when equal.
double psnr_mse(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& test);

/// ||Y - D X||_F.
double reconstruction_error(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& D,
                            const Eigen::MatrixXd& X);

}  // namespace sbdl
