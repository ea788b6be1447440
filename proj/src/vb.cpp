#include "sbdl/vb.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/digamma.hpp>

#include "sbdl/error.hpp"
#include "sbdl/linalg.hpp"

namespace sbdl {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

Eigen::MatrixXd dict_second_moment(const VBState& state) {
  const auto m = static_cast<double>(state.dict_mean.rows());
  return state.dict_mean.transpose() * state.dict_mean + m * state.dict_row_cov;
}

Eigen::MatrixXd code_second_moment(const VBState& state) {
  return state.code_means * state.code_means.transpose() + state.code_cov_sum;
}

double gamma_entropy(double shape, double rate) {
  return shape - std::log(rate) + std::lgamma(shape) +
         (1.0 - shape) * boost::math::digamma(shape);
}

}  // namespace

VBMoments compute_moments(const VBState& state) {
  VBMoments mom;
  mom.x_mean = state.code_means;
  mom.x_outer = code_second_moment(state);
  mom.x_sq = state.code_means.array().square() + state.code_cov_diag.array();
  mom.d_mean = state.dict_mean;
  mom.dtd = dict_second_moment(state);
  mom.gamma_mean = state.gamma_mean();
  mom.alpha_mean = state.alpha_mean();
  return mom;
}

void update_codes(VBState& state, const TrainingSet& data) {
  const Eigen::Index n = state.dict_mean.cols();
  const Eigen::Index l = data.num_signals();
  const double gamma = state.gamma_mean();
  const Eigen::MatrixXd weighted_dtd = gamma * dict_second_moment(state);
  const Eigen::MatrixXd projected = gamma * (state.dict_mean.transpose() * data.Y);
  const Eigen::MatrixXd alpha = state.alpha_mean();
  const bool keep = !state.code_covs.empty();

  state.code_cov_sum.setZero(n, n);
  for (Eigen::Index col = 0; col < l; ++col) {
    Eigen::MatrixXd precision = weighted_dtd;
    precision.diagonal() += alpha.col(col);
    const SpdFactor factor(precision, "code precision");
    Eigen::MatrixXd cov = factor.inverse();
    state.code_means.col(col) = factor.solve(Eigen::VectorXd(projected.col(col)));
    state.code_cov_diag.col(col) = cov.diagonal();
    state.code_cov_logdet[col] = -factor.log_det();
    state.code_cov_sum += cov;
    if (keep) state.code_covs[static_cast<std::size_t>(col)] = std::move(cov);
  }
}

void update_dictionary_full(VBState& state, const TrainingSet& data, const ModelConfig& cfg) {
  const double gamma = state.gamma_mean();
  Eigen::MatrixXd precision = gamma * code_second_moment(state);
  precision.diagonal().array() += cfg.beta_inverse();
  const SpdFactor factor(precision, "dictionary row precision");
  state.dict_row_cov = factor.inverse();
  // <D> = B A with B = <gamma> Y <X>^T; solved as A B^T rather than multiplied.
  const Eigen::MatrixXd bt = gamma * (state.code_means * data.Y.transpose());
  state.dict_mean = factor.solve(bt).transpose();
  state.dict_cov_diagonal = false;
}

// Sequential atom update. Atom n sees the already-updated means of atoms
// k < n. The cross term uses the full <X X^T>, so the posterior covariance
// of the codes enters through <x_k. x_n.^T> as well as through the diagonal.
void update_dictionary_atomwise(VBState& state, const TrainingSet& data, const ModelConfig& cfg) {
  const Eigen::Index num_atoms = state.dict_mean.cols();
  const double gamma = state.gamma_mean();
  const double prior = cfg.beta_inverse();
  const Eigen::MatrixXd outer = code_second_moment(state);
  const Eigen::MatrixXd y_xt = data.Y * state.code_means.transpose();

  Eigen::VectorXd variances(num_atoms);
  Eigen::MatrixXd& dict = state.dict_mean;
  for (Eigen::Index atom = 0; atom < num_atoms; ++atom) {
    const double precision = gamma * outer(atom, atom) + prior;
    if (!(precision > 0.0)) {
      throw Error(ErrorCode::SingularPrecision,
                  "atom " + std::to_string(atom) + " has non-positive posterior precision");
    }
    // <Y^{-n}><x_n.>^T = Y<x_n.>^T - sum_{k != n} <d_k> <x_k. x_n.^T>
    Eigen::VectorXd rhs = y_xt.col(atom) - dict * outer.col(atom);
    rhs += dict.col(atom) * outer(atom, atom);
    dict.col(atom) = (gamma / precision) * rhs;
    variances[atom] = 1.0 / precision;
  }
  state.dict_row_cov = variances.asDiagonal();
  state.dict_cov_diagonal = true;
}

void update_alpha(VBState& state, const ModelConfig& cfg) {
  state.alpha_shape = cfg.a + 0.5;
  state.alpha_rates =
      cfg.b + 0.5 * (state.code_means.array().square() + state.code_cov_diag.array());
}

double expected_residual(const VBState& state, const TrainingSet& data) {
  const Eigen::MatrixXd fitted = state.dict_mean * state.code_means;
  const double mismatch = (data.Y - fitted).squaredNorm();
  // tr(<D^T D><X X^T>); both factors are symmetric.
  const double second = dict_second_moment(state).cwiseProduct(code_second_moment(state)).sum();
  // tr(<D>^T<D><X><X>^T) = ||<D><X>||_F^2
  const double mean_part = fitted.squaredNorm();
  return mismatch + second - mean_part;
}

void update_gamma(VBState& state, const TrainingSet& data, const ModelConfig& cfg) {
  double residual = expected_residual(state, data);
  if (residual < 0.0) {
    if (residual < -1e-8 * data.Y.squaredNorm()) {
      throw Error(ErrorCode::NegativeResidual,
                  "expected residual " + std::to_string(residual) + " is negative");
    }
    residual = 0.0;
  }
  const auto size = static_cast<double>(data.Y.size());
  state.gamma_shape = 0.5 * size + cfg.c;
  state.gamma_rate = cfg.d + 0.5 * residual;
}

double compute_elbo(const VBState& state, const TrainingSet& data, const ModelConfig& cfg) {
  using boost::math::digamma;
  const auto m = static_cast<double>(data.signal_dim());
  const auto n = static_cast<double>(state.dict_mean.cols());
  const auto size = static_cast<double>(data.Y.size());
  const auto cells = static_cast<double>(state.alpha_rates.size());

  const double gamma_mean = state.gamma_mean();
  const double log_gamma_mean = digamma(state.gamma_shape) - std::log(state.gamma_rate);
  const Eigen::ArrayXXd alpha_mean = state.alpha_mean().array();
  const Eigen::ArrayXXd log_alpha_mean = digamma(state.alpha_shape) - state.alpha_rates.array().log();
  const Eigen::ArrayXXd x_sq =
      state.code_means.array().square() + state.code_cov_diag.array();

  double elbo = 0.0;
  // E ln p(Y | X, D, gamma)
  elbo += 0.5 * size * (log_gamma_mean - kLog2Pi) -
          0.5 * gamma_mean * expected_residual(state, data);
  // E ln p(X | alpha)
  elbo += 0.5 * (log_alpha_mean.sum() - cells * kLog2Pi) - 0.5 * (alpha_mean * x_sq).sum();
  // E ln p(alpha)
  elbo += cells * (cfg.a * std::log(cfg.b) - std::lgamma(cfg.a)) +
          (cfg.a - 1.0) * log_alpha_mean.sum() - cfg.b * alpha_mean.sum();
  // E ln p(D); an infinite beta is a flat prior and contributes a constant.
  if (!std::isinf(cfg.beta)) {
    elbo += -0.5 * m * n * (kLog2Pi + std::log(cfg.beta)) -
            0.5 / cfg.beta * dict_second_moment(state).trace();
  }
  // E ln p(gamma)
  elbo += cfg.c * std::log(cfg.d) - std::lgamma(cfg.c) + (cfg.c - 1.0) * log_gamma_mean -
          cfg.d * gamma_mean;

  // Entropies.
  elbo += 0.5 * n * (1.0 + kLog2Pi) * static_cast<double>(data.num_signals()) +
          0.5 * state.code_cov_logdet.sum();
  double dict_logdet = 0.0;
  if (state.dict_cov_diagonal) {
    dict_logdet = state.dict_row_cov.diagonal().array().log().sum();
  } else {
    dict_logdet = SpdFactor(state.dict_row_cov, "dictionary row covariance").log_det();
  }
  elbo += 0.5 * m * (n * (1.0 + kLog2Pi) + dict_logdet);
  for (Eigen::Index i = 0; i < state.alpha_rates.size(); ++i) {
    elbo += gamma_entropy(state.alpha_shape, state.alpha_rates.data()[i]);
  }
  elbo += gamma_entropy(state.gamma_shape, state.gamma_rate);

  if (!std::isfinite(elbo)) {
    throw Error(ErrorCode::NonFinite, "ELBO evaluated to " + std::to_string(elbo) +
                                          " (gamma rate " + std::to_string(state.gamma_rate) +
                                          ", dictionary log det " + std::to_string(dict_logdet) +
                                          ")");
  }
  return elbo;
}

VBResult run_vb(const ModelConfig& cfg, const TrainingSet& data, Engine variant) {
  if (variant == Engine::Gibbs) {
    throw Error(ErrorCode::InvalidArgument, "run_vb needs a vb-full or vb-atomwise variant");
  }
  validate_config(cfg, data, variant);
  VBResult result{initialize_vb_state(cfg, data), {}};
  VBState& state = result.state;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const Eigen::MatrixXd previous = state.dict_mean;
    update_codes(state, data);
    if (variant == Engine::VbFull) {
      update_dictionary_full(state, data, cfg);
    } else {
      update_dictionary_atomwise(state, data, cfg);
    }
    update_alpha(state, cfg);
    update_gamma(state, data, cfg);

    VBSweep sweep;
    sweep.iteration = iter;
    sweep.elbo = compute_elbo(state, data, cfg);
    const double scale = previous.norm();
    sweep.dict_change = (state.dict_mean - previous).norm() / (scale > 0.0 ? scale : 1.0);
    result.trace.sweeps.push_back(sweep);
    if (sweep.dict_change < cfg.tol) {
      result.trace.converged = true;
      break;
    }
  }
  result.trace.max_iters_reached = !result.trace.converged;
  return result;
}

}  // namespace sbdl
