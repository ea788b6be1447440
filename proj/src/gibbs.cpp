#include "sbdl/gibbs.hpp"

#include <cmath>
#include <string>

#include "sbdl/error.hpp"
#include "sbdl/linalg.hpp"

namespace sbdl {

void sample_codes(GibbsState& state, const TrainingSet& data) {
  const double gamma = state.gamma;
  const Eigen::MatrixXd weighted_dtd = gamma * (state.D.transpose() * state.D);
  const Eigen::MatrixXd projected = gamma * (state.D.transpose() * data.Y);
  const Eigen::Index num_atoms = state.D.cols();

  for (Eigen::Index col = 0; col < data.num_signals(); ++col) {
    Eigen::MatrixXd precision = weighted_dtd;
    precision.diagonal() += state.alpha.col(col);
    const SpdFactor factor(precision, "code precision");
    const Eigen::VectorXd mean = factor.solve(Eigen::VectorXd(projected.col(col)));
    state.X.col(col) = mean + factor.solve_upper(state.rng.normal_vector(num_atoms));
  }
}

Eigen::MatrixXd sample_atoms(GibbsState& state, const TrainingSet& data, double beta) {
  const double prior = std::isinf(beta) ? 0.0 : 1.0 / beta;
  const Eigen::Index m = data.signal_dim();
  Eigen::MatrixXd residual = data.Y - state.D * state.X;

  for (Eigen::Index atom = 0; atom < state.D.cols(); ++atom) {
    const Eigen::VectorXd row = state.X.row(atom).transpose();
    const double precision = state.gamma * row.squaredNorm() + prior;
    if (!(precision > 0.0)) {
      throw Error(ErrorCode::SingularPrecision,
                  "atom " + std::to_string(atom) + " has non-positive conditional precision");
    }
    // Y^{-n} x_n.^T = (R + d_n x_n.) x_n.^T
    const Eigen::VectorXd projected =
        residual * row + state.D.col(atom) * row.squaredNorm();
    const Eigen::VectorXd old_atom = state.D.col(atom);
    state.D.col(atom) = (state.gamma / precision) * projected +
                        state.rng.normal_vector(m) / std::sqrt(precision);
    residual.noalias() -= (state.D.col(atom) - old_atom) * row.transpose();
  }
  return residual;
}

void sample_alpha(GibbsState& state, const ModelConfig& cfg) {
  const double shape = cfg.a + 0.5;
  for (Eigen::Index col = 0; col < state.X.cols(); ++col) {
    for (Eigen::Index row = 0; row < state.X.rows(); ++row) {
      const double x = state.X(row, col);
      state.alpha(row, col) = state.rng.gamma(shape, cfg.b + 0.5 * x * x);
    }
  }
}

void sample_gamma(GibbsState& state, const TrainingSet& data, const ModelConfig& cfg) {
  const double shape = cfg.c + 0.5 * static_cast<double>(data.Y.size());
  const double rate = cfg.d + 0.5 * (data.Y - state.D * state.X).squaredNorm();
  state.gamma = state.rng.gamma(shape, rate);
}

GibbsResult run_gibbs(const ModelConfig& cfg, const TrainingSet& data) {
  validate_config(cfg, data, Engine::Gibbs);
  GibbsResult result{{}, initialize_gibbs_state(cfg, data)};
  GibbsState& state = result.state;
  ChainTrace& trace = result.trace;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    sample_codes(state, data);
    sample_atoms(state, data, cfg.beta);
    sample_alpha(state, cfg);
    sample_gamma(state, data, cfg);

    trace.residual_per_iter.push_back((data.Y - state.D * state.X).norm());
    trace.gamma_per_iter.push_back(state.gamma);
    if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thinning == 0) {
      trace.kept_dicts.push_back(state.D);
    }
  }
  return result;
}

Eigen::MatrixXd estimate_dictionary(const ChainTrace& trace, const DictEstimate& mode) {
  if (trace.kept_dicts.empty()) {
    throw Error(ErrorCode::EmptyTrace, "no dictionaries were kept after burn-in");
  }
  if (mode.kind == DictEstimate::Kind::LastSample) return trace.kept_dicts.back();

  const auto kept = static_cast<int>(trace.kept_dicts.size());
  if (mode.tail < 1 || mode.tail > kept) {
    throw Error(ErrorCode::TailLargerThanTrace, "average_tail:" + std::to_string(mode.tail) +
                                                    " but only " + std::to_string(kept) +
                                                    " dictionaries kept");
  }
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(trace.kept_dicts.back().rows(),
                                              trace.kept_dicts.back().cols());
  for (int i = kept - mode.tail; i < kept; ++i) sum += trace.kept_dicts[static_cast<std::size_t>(i)];
  return sum / static_cast<double>(mode.tail);
}

}  // namespace sbdl
