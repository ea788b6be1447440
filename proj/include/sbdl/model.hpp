#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sbdl/random.hpp"

namespace sbdl {

enum class Engine { VbFull, VbAtomwise, Gibbs };

std::string_view to_string(Engine engine);
Engine parse_engine(std::string_view text);

/// How a dictionary is read off a finished Gibbs chain.
struct DictEstimate {
  enum class Kind { LastSample, AverageTail };
  Kind kind = Kind::LastSample;
  int tail = 1;

  static DictEstimate last_sample() { return {}; }
  static DictEstimate average_tail(int k) { return {Kind::AverageTail, k}; }

  bool operator==(const DictEstimate&) const = default;
};

std::string to_string(const DictEstimate& mode);
DictEstimate parse_dict_estimate(std::string_view text);

/// Prior hyperparameters and run budget. All Gamma laws are shape-rate.
struct ModelConfig {
  double a = 0.5;     // alpha prior shape
  double b = 1e-6;    // alpha prior rate
  double c = 0.5;     // gamma prior shape
  double d = 1e-6;    // gamma prior rate
  double beta = 1e8;  // atom-entry prior variance; +inf drops the prior term
  int num_atoms = 0;
  int max_iters = 500;
  int burn_in = 0;
  int thinning = 1;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  DictEstimate dict_estimate;
  /// Keep every per-signal code covariance in VBState::code_covs. Off by
  /// default: the updates only need the diagonal, the sum and the log
  /// determinants, and the full set is L*N*N doubles.
  bool keep_code_covs = false;

  /// 1/beta, or 0 for beta = +inf.
  double beta_inverse() const { return std::isinf(beta) ? 0.0 : 1.0 / beta; }
};

struct TrainingSet {
  Eigen::MatrixXd Y;  // M x L, one signal per column

  Eigen::Index signal_dim() const { return Y.rows(); }
  Eigen::Index num_signals() const { return Y.cols(); }
};

/// The factorized variational posterior q(X) q(D) q(alpha) q(gamma).
struct VBState {
  Eigen::MatrixXd code_means;              // N x L, column l is mu_l
  std::vector<Eigen::MatrixXd> code_covs;  // Sigma_l, only with keep_code_covs
  Eigen::MatrixXd code_cov_diag;           // N x L, diag(Sigma_l) in column l
  Eigen::MatrixXd code_cov_sum;            // N x N, sum_l Sigma_l
  Eigen::VectorXd code_cov_logdet;         // L, log det Sigma_l

  Eigen::MatrixXd dict_mean;     // M x N
  Eigen::MatrixXd dict_row_cov;  // N x N, shared covariance of every row
  bool dict_cov_diagonal = false;

  double alpha_shape = 0.0;
  Eigen::MatrixXd alpha_rates;  // N x L
  double gamma_shape = 0.0;
  double gamma_rate = 0.0;

  Eigen::MatrixXd alpha_mean() const { return alpha_shape / alpha_rates.array(); }
  double gamma_mean() const { return gamma_shape / gamma_rate; }
};

/// One concrete draw of every hidden variable plus the chain's generator.
struct GibbsState {
  Eigen::MatrixXd X;      // N x L
  Eigen::MatrixXd D;      // M x N
  Eigen::MatrixXd alpha;  // N x L
  double gamma = 1.0;
  Rng rng;
};

const ModelConfig& validate_config(const ModelConfig& cfg, const TrainingSet& data,
                                   Engine engine);

/// Unit-norm columns drawn from the training signals without replacement
/// (recycled with 0.01-std perturbation when there are fewer signals than
/// atoms).
Eigen::MatrixXd initial_dictionary(const TrainingSet& data, Eigen::Index num_atoms, Rng& rng);

VBState initialize_vb_state(const ModelConfig& cfg, const TrainingSet& data);
GibbsState initialize_gibbs_state(const ModelConfig& cfg, const TrainingSet& data);

}  // namespace sbdl
