#pragma once

#include <vector>

#include <Eigen/Core>

#include "sbdl/model.hpp"

namespace sbdl {

/// Posterior expectations consumed by the coordinate updates.
struct VBMoments {
  Eigen::MatrixXd x_mean;   // <X>, N x L
  Eigen::MatrixXd x_outer;  // <X X^T> = <X><X>^T + sum_l Sigma_l
  Eigen::MatrixXd x_sq;     // <x_nl^2> = mu_l[n]^2 + Sigma_l[n,n]
  Eigen::MatrixXd d_mean;   // <D>
  Eigen::MatrixXd dtd;      // <D^T D> = <D>^T <D> + M A
  double gamma_mean = 0.0;
  Eigen::MatrixXd alpha_mean;
};

VBMoments compute_moments(const VBState& state);

// Coordinate updates. Each replaces one factor of q with its optimum given
// the current values of the other three.

void update_codes(VBState& state, const TrainingSet& data);
void update_dictionary_full(VBState& state, const TrainingSet& data, const ModelConfig& cfg);
void update_dictionary_atomwise(VBState& state, const TrainingSet& data, const ModelConfig& cfg);
void update_alpha(VBState& state, const ModelConfig& cfg);
void update_gamma(VBState& state, const TrainingSet& data, const ModelConfig& cfg);

/// <||Y - D X||_F^2> under q, from the three-term expansion
/// ||Y - <D><X>||^2 + tr(<D^T D><X X^T>) - tr(<D>^T<D><X><X>^T).
double expected_residual(const VBState& state, const TrainingSet& data);

/// Evidence lower bound E_q[ln p(Y, X, D, alpha, gamma)] - E_q[ln q].
/// With beta = +inf the (improper, constant) dictionary prior is dropped.
double compute_elbo(const VBState& state, const TrainingSet& data, const ModelConfig& cfg);

struct VBSweep {
  int iteration = 0;
  double elbo = 0.0;
  double dict_change = 0.0;  // ||D_new - D_old||_F / ||D_old||_F
};

struct VBTrace {
  std::vector<VBSweep> sweeps;
  bool converged = false;
  bool max_iters_reached = false;
};

struct VBResult {
  VBState state;
  VBTrace trace;
};

/// Runs codes -> dictionary -> alpha -> gamma sweeps until the relative
/// change of <D> drops below cfg.tol or cfg.max_iters sweeps have run.
VBResult run_vb(const ModelConfig& cfg, const TrainingSet& data, Engine variant);

}  // namespace sbdl
