#pragma once

#include <vector>

#include <Eigen/Core>

#include "sbdl/model.hpp"

namespace sbdl {

struct ChainTrace {
  std::vector<Eigen::MatrixXd> kept_dicts;  // post-burn-in, thinned
  std::vector<double> residual_per_iter;    // ||Y - D X||_F after each sweep
  std::vector<double> gamma_per_iter;
};

// Conditional samplers. Each redraws one block of the state in place from
// its full conditional given the current values of the others.

/// x_l ~ N(gamma Sigma D^T y_l, Sigma), Sigma = (gamma D^T D + diag(alpha_l))^{-1}.
/// The precision is factored as U^T U and x = mean + U^{-1} z.
void sample_codes(GibbsState& state, const TrainingSet& data);

/// Atoms in index order, each against the latest values of all the others.
/// Returns the running residual Y - D X maintained through rank-1 updates.
Eigen::MatrixXd sample_atoms(GibbsState& state, const TrainingSet& data, double beta);

void sample_alpha(GibbsState& state, const ModelConfig& cfg);

/// gamma ~ Gamma(c + ML/2, d + ||Y - D X||_F^2 / 2).
void sample_gamma(GibbsState& state, const TrainingSet& data, const ModelConfig& cfg);

struct GibbsResult {
  ChainTrace trace;
  GibbsState state;
};

GibbsResult run_gibbs(const ModelConfig& cfg, const TrainingSet& data);

Eigen::MatrixXd estimate_dictionary(const ChainTrace& trace, const DictEstimate& mode);

}  // namespace sbdl
