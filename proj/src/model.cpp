#include "sbdl/model.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "sbdl/error.hpp"

namespace sbdl {

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::VbFull: return "vb-full";
    case Engine::VbAtomwise: return "vb-atomwise";
    case Engine::Gibbs: return "gibbs";
  }
  return "unknown";
}

Engine parse_engine(std::string_view text) {
  if (text == "vb-full") return Engine::VbFull;
  if (text == "vb-atomwise") return Engine::VbAtomwise;
  if (text == "gibbs") return Engine::Gibbs;
  throw Error(ErrorCode::InvalidArgument,
              "unknown engine '" + std::string(text) + "' (expected vb-full, vb-atomwise or gibbs)");
}

std::string to_string(const DictEstimate& mode) {
  if (mode.kind == DictEstimate::Kind::LastSample) return "last_sample";
  return "average_tail:" + std::to_string(mode.tail);
}

DictEstimate parse_dict_estimate(std::string_view text) {
  if (text == "last_sample") return DictEstimate::last_sample();
  constexpr std::string_view prefix = "average_tail:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto digits = text.substr(prefix.size());
    int k = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && end == digits.data() + digits.size() && k >= 1) {
      return DictEstimate::average_tail(k);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "bad dictionary estimate '" + std::string(text) +
                                              "' (expected last_sample or average_tail:K)");
}

const ModelConfig& validate_config(const ModelConfig& cfg, const TrainingSet& data,
                                   Engine engine) {
  const std::pair<const char*, double> positives[] = {
      {"a", cfg.a}, {"b", cfg.b}, {"c", cfg.c}, {"d", cfg.d}, {"beta", cfg.beta}};
  for (const auto& [name, value] : positives) {
    if (!(value > 0.0) || std::isnan(value)) {
      throw Error(ErrorCode::NonPositiveHyperparameter,
                  std::string(name) + " = " + std::to_string(value));
    }
  }
  if (cfg.num_atoms < 1) {
    throw Error(ErrorCode::InvalidArgument, "num_atoms must be at least 1");
  }
  if (cfg.max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
  }
  if (cfg.burn_in < 0 || cfg.thinning < 1 || !(cfg.tol >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "burn_in, thinning and tol must be non-negative");
  }
  if (engine == Engine::Gibbs && cfg.burn_in >= cfg.max_iters) {
    throw Error(ErrorCode::BurnInExceedsIterations,
                "burn_in " + std::to_string(cfg.burn_in) + " >= max_iters " +
                    std::to_string(cfg.max_iters));
  }
  if (data.signal_dim() < 1 || data.num_signals() < 1) {
    throw Error(ErrorCode::EmptyTrainingSet, "training matrix has no entries");
  }
  if (!data.Y.allFinite()) {
    throw Error(ErrorCode::NonFiniteData, "training matrix has non-finite entries");
  }
  return cfg;
}

Eigen::MatrixXd initial_dictionary(const TrainingSet& data, Eigen::Index num_atoms, Rng& rng) {
  const Eigen::Index m = data.signal_dim();
  const Eigen::Index l = data.num_signals();
  const auto picked = rng.sample_without_replacement(l, std::min(l, num_atoms));

  Eigen::MatrixXd dict(m, num_atoms);
  for (Eigen::Index n = 0; n < num_atoms; ++n) {
    const auto source = picked[static_cast<std::size_t>(n % l)];
    dict.col(n) = data.Y.col(source);
    if (n >= l) dict.col(n) += 0.01 * rng.normal_vector(m);
  }
  for (Eigen::Index n = 0; n < num_atoms; ++n) {
    double norm = dict.col(n).norm();
    // All-zero training columns give no direction; fall back to a random one.
    while (norm == 0.0) {
      dict.col(n) = rng.normal_vector(m);
      norm = dict.col(n).norm();
    }
    dict.col(n) /= norm;
  }
  return dict;
}

VBState initialize_vb_state(const ModelConfig& cfg, const TrainingSet& data) {
  const Eigen::Index m = data.signal_dim();
  const Eigen::Index l = data.num_signals();
  const Eigen::Index n = cfg.num_atoms;
  Rng rng(cfg.seed);

  VBState state;
  state.dict_mean = initial_dictionary(data, n, rng);
  state.dict_row_cov = 1e-6 * Eigen::MatrixXd::Identity(n, n);
  state.dict_cov_diagonal = false;

  state.code_means = Eigen::MatrixXd::Zero(n, l);
  state.code_cov_diag = Eigen::MatrixXd::Ones(n, l);
  state.code_cov_sum = static_cast<double>(l) * Eigen::MatrixXd::Identity(n, n);
  state.code_cov_logdet = Eigen::VectorXd::Zero(l);
  if (cfg.keep_code_covs) {
    state.code_covs.assign(static_cast<std::size_t>(l), Eigen::MatrixXd::Identity(n, n));
  }

  // alpha update applied to <x^2> = 1, matching the identity code covariance.
  state.alpha_shape = cfg.a + 0.5;
  state.alpha_rates = Eigen::MatrixXd::Constant(n, l, cfg.b + 0.5);
  state.gamma_shape = 0.5 * static_cast<double>(m * l) + cfg.c;
  state.gamma_rate = cfg.d + 0.5 * data.Y.squaredNorm() / static_cast<double>(l);
  return state;
}

GibbsState initialize_gibbs_state(const ModelConfig& cfg, const TrainingSet& data) {
  const Eigen::Index l = data.num_signals();
  const Eigen::Index n = cfg.num_atoms;

  GibbsState state;
  state.rng = Rng(cfg.seed);
  state.D = initial_dictionary(data, n, state.rng);
  state.X = Eigen::MatrixXd::Zero(n, l);
  state.alpha = Eigen::MatrixXd::Ones(n, l);

  const double count = static_cast<double>(data.Y.size());
  const double mean = data.Y.sum() / count;
  const double variance = (data.Y.array() - mean).square().sum() / count;
  state.gamma = variance > 0.0 ? 1.0 / variance : 1.0;
  return state;
}

}  // namespace sbdl
