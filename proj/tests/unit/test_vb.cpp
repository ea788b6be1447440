#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>

#include "doctest.h"
#include "sbdl/error.hpp"
#include "sbdl/synthetic.hpp"
#include "sbdl/vb.hpp"
#include "test_helpers.hpp"

using namespace sbdl;
using testing::rel_diff;

namespace {

ModelConfig small_config(int atoms, double beta = 1e8) {
  ModelConfig cfg;
  cfg.num_atoms = atoms;
  cfg.beta = beta;
  cfg.keep_code_covs = true;
  return cfg;
}

// Posterior second moments straight from the per-signal covariances.
double x_cross(const VBState& s, Eigen::Index k, Eigen::Index n, Eigen::Index l) {
  return s.code_means(k, l) * s.code_means(n, l) + s.code_covs[static_cast<std::size_t>(l)](k, n);
}

double d_cross(const VBState& s, Eigen::Index j, Eigen::Index n) {
  double sum = 0.0;
  for (Eigen::Index m = 0; m < s.dict_mean.rows(); ++m) {
    sum += s.dict_mean(m, j) * s.dict_mean(m, n) + s.dict_row_cov(j, n);
  }
  return sum;
}

// Element-by-element E[(y_ml - d_m^T x_l)^2].
double oracle_expected_residual(const VBState& s, const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd& a = s.dict_row_cov;
  double total = 0.0;
  for (Eigen::Index l = 0; l < y.cols(); ++l) {
    const Eigen::MatrixXd& sigma = s.code_covs[static_cast<std::size_t>(l)];
    const Eigen::VectorXd mu = s.code_means.col(l);
    for (Eigen::Index m = 0; m < y.rows(); ++m) {
      const Eigen::VectorXd dm = s.dict_mean.row(m).transpose();
      const double mean_err = y(m, l) - dm.dot(mu);
      total += mean_err * mean_err + dm.dot(sigma * dm) + mu.dot(a * mu) + (a * sigma).trace();
    }
  }
  return total;
}

struct Instance {
  TrainingSet data;
  VBState state;
};

Instance random_instance(Eigen::Index m, Eigen::Index n, Eigen::Index l, std::uint64_t seed) {
  Rng rng(seed);
  Instance inst;
  inst.data.Y = testing::random_matrix(m, l, rng);
  inst.state = testing::random_vb_state(m, n, l, rng);
  return inst;
}

}  // namespace

TEST_CASE("code update matches dense inversion of the per-signal precision") {
  auto [data, s] = random_instance(2, 2, 2, 11);
  const double gamma = s.gamma_mean();
  const Eigen::MatrixXd alpha = s.alpha_mean();
  // <D^T D> entry by entry.
  Eigen::MatrixXd dtd(2, 2);
  for (Eigen::Index j = 0; j < 2; ++j)
    for (Eigen::Index n = 0; n < 2; ++n) dtd(j, n) = d_cross(s, j, n);

  std::vector<Eigen::MatrixXd> covs;
  Eigen::MatrixXd means(2, 2);
  for (Eigen::Index l = 0; l < 2; ++l) {
    Eigen::MatrixXd precision = gamma * dtd;
    for (Eigen::Index n = 0; n < 2; ++n) precision(n, n) += alpha(n, l);
    const Eigen::MatrixXd cov = precision.fullPivLu().inverse();
    covs.push_back(cov);
    means.col(l) = gamma * cov * s.dict_mean.transpose() * data.Y.col(l);
  }

  update_codes(s, data);
  CHECK(rel_diff(s.code_means, means) < 1e-10);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(rel_diff(s.code_covs[l], covs[l]) < 1e-10);
    CHECK(rel_diff(s.code_cov_diag.col(static_cast<Eigen::Index>(l)), covs[l].diagonal()) < 1e-10);
    CHECK(s.code_cov_logdet[static_cast<Eigen::Index>(l)] ==
          doctest::Approx(std::log(covs[l].determinant())).epsilon(1e-10));
  }
  CHECK(rel_diff(s.code_cov_sum, covs[0] + covs[1]) < 1e-10);
}

TEST_CASE("code update without stored covariances keeps identical statistics") {
  auto a = random_instance(5, 4, 7, 3);
  VBState lean = a.state;
  lean.code_covs.clear();
  update_codes(a.state, a.data);
  update_codes(lean, a.data);
  CHECK(lean.code_covs.empty());
  CHECK(lean.code_means == a.state.code_means);
  CHECK(lean.code_cov_sum == a.state.code_cov_sum);
  CHECK(lean.code_cov_logdet == a.state.code_cov_logdet);
}

TEST_CASE("full dictionary update matches per-row normal equations") {
  for (const double beta : {1.0, 1e8}) {
    auto [data, s] = random_instance(2, 2, 2, 21);
    const ModelConfig cfg = small_config(2, beta);
    const double gamma = s.gamma_mean();
    Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(2, 2) / beta;
    for (Eigen::Index l = 0; l < 2; ++l)
      for (Eigen::Index k = 0; k < 2; ++k)
        for (Eigen::Index n = 0; n < 2; ++n) precision(k, n) += gamma * x_cross(s, k, n, l);
    const Eigen::MatrixXd cov = precision.fullPivLu().inverse();
    Eigen::MatrixXd expected(2, 2);
    for (Eigen::Index m = 0; m < 2; ++m) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2);
      for (Eigen::Index l = 0; l < 2; ++l) rhs += gamma * data.Y(m, l) * s.code_means.col(l);
      expected.row(m) = (cov * rhs).transpose();
    }
    update_dictionary_full(s, data, cfg);
    CHECK(rel_diff(s.dict_mean, expected) < 1e-10);
    CHECK(rel_diff(s.dict_row_cov, cov) < 1e-10);
    CHECK_FALSE(s.dict_cov_diagonal);
  }
}

TEST_CASE("atomwise dictionary update is the sequential coordinate optimum") {
  auto [data, s] = random_instance(2, 2, 2, 31);
  s.dict_row_cov = s.dict_row_cov.diagonal().asDiagonal();
  s.dict_cov_diagonal = true;
  const ModelConfig cfg = small_config(2, 3.0);
  const double gamma = s.gamma_mean();

  // Minimizer of gamma/2 E||Y - D X||^2 + ||d_n||^2 / (2 beta) over d_n,
  // written out signal by signal.
  Eigen::MatrixXd dict = s.dict_mean;
  Eigen::VectorXd vars(2);
  for (Eigen::Index n = 0; n < 2; ++n) {
    double curvature = 1.0 / cfg.beta;
    Eigen::VectorXd linear = Eigen::VectorXd::Zero(2);
    for (Eigen::Index l = 0; l < 2; ++l) {
      curvature += gamma * x_cross(s, n, n, l);
      linear += gamma * data.Y.col(l) * s.code_means(n, l);
      for (Eigen::Index k = 0; k < 2; ++k) {
        if (k != n) linear -= gamma * dict.col(k) * x_cross(s, k, n, l);
      }
    }
    dict.col(n) = linear / curvature;
    vars[n] = 1.0 / curvature;
  }
  update_dictionary_atomwise(s, data, cfg);
  CHECK(rel_diff(s.dict_mean, dict) < 1e-10);
  CHECK(rel_diff(s.dict_row_cov, Eigen::MatrixXd(vars.asDiagonal())) < 1e-10);
  CHECK(s.dict_cov_diagonal);
}

TEST_CASE("alpha update matches the elementwise conjugate form") {
  auto [data, s] = random_instance(2, 2, 2, 41);
  ModelConfig cfg = small_config(2);
  cfg.a = 0.7;
  cfg.b = 0.3;
  update_alpha(s, cfg);
  CHECK(s.alpha_shape == doctest::Approx(1.2).epsilon(1e-15));
  for (Eigen::Index n = 0; n < 2; ++n) {
    for (Eigen::Index l = 0; l < 2; ++l) {
      const double second = x_cross(s, n, n, l);
      CHECK(s.alpha_rates(n, l) == doctest::Approx(0.3 + 0.5 * second).epsilon(1e-12));
    }
  }
}

TEST_CASE("gamma update matches the elementwise expected residual") {
  auto [data, s] = random_instance(2, 2, 2, 51);
  ModelConfig cfg = small_config(2);
  cfg.c = 0.9;
  cfg.d = 0.2;
  const double residual = oracle_expected_residual(s, data.Y);
  CHECK(expected_residual(s, data) == doctest::Approx(residual).epsilon(1e-10));
  update_gamma(s, data, cfg);
  CHECK(s.gamma_shape == doctest::Approx(0.9 + 2.0).epsilon(1e-15));
  CHECK(s.gamma_rate == doctest::Approx(0.2 + 0.5 * residual).epsilon(1e-10));
}

TEST_CASE("expected residual agrees with Monte-Carlo over q") {
  auto [data, s] = random_instance(2, 2, 2, 61);
  Rng rng(99);
  const Eigen::MatrixXd a_chol = s.dict_row_cov.llt().matrixL();
  std::vector<Eigen::MatrixXd> x_chol;
  for (const auto& cov : s.code_covs) x_chol.emplace_back(cov.llt().matrixL());

  constexpr int kDraws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < kDraws; ++t) {
    Eigen::MatrixXd d(2, 2), x(2, 2);
    for (Eigen::Index m = 0; m < 2; ++m)
      d.row(m) = (s.dict_mean.row(m).transpose() + a_chol * rng.normal_vector(2)).transpose();
    for (Eigen::Index l = 0; l < 2; ++l)
      x.col(l) = s.code_means.col(l) + x_chol[static_cast<std::size_t>(l)] * rng.normal_vector(2);
    const double r = (data.Y - d * x).squaredNorm();
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sum_sq / kDraws - mean * mean) / kDraws);
  CHECK(std::abs(mean - expected_residual(s, data)) < 3.0 * se);
}

TEST_CASE("gamma update rejects a clearly negative residual") {
  auto [data, s] = random_instance(2, 2, 2, 71);
  s.code_cov_sum = -100.0 * Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(update_gamma(s, data, small_config(2)), Error);
}

TEST_CASE("ELBO of a scalar model matches the hand-expanded bound") {
  using boost::math::digamma;
  const double y = 1.7, mu = 0.4, sx = 0.3, md = -1.1, vd = 0.05;
  const double ta = 1.3, tb = 0.6, tc = 2.5, td = 0.8;
  ModelConfig cfg = small_config(1, 2.0);
  cfg.a = 0.5;
  cfg.b = 0.1;
  cfg.c = 0.7;
  cfg.d = 0.4;

  VBState s;
  s.code_means = Eigen::MatrixXd::Constant(1, 1, mu);
  s.code_covs = {Eigen::MatrixXd::Constant(1, 1, sx)};
  s.code_cov_diag = Eigen::MatrixXd::Constant(1, 1, sx);
  s.code_cov_sum = Eigen::MatrixXd::Constant(1, 1, sx);
  s.code_cov_logdet = Eigen::VectorXd::Constant(1, std::log(sx));
  s.dict_mean = Eigen::MatrixXd::Constant(1, 1, md);
  s.dict_row_cov = Eigen::MatrixXd::Constant(1, 1, vd);
  s.alpha_shape = ta;
  s.alpha_rates = Eigen::MatrixXd::Constant(1, 1, tb);
  s.gamma_shape = tc;
  s.gamma_rate = td;
  const TrainingSet data{Eigen::MatrixXd::Constant(1, 1, y)};

  const double ln2pi = std::log(2.0 * std::numbers::pi);
  const double e_ln_alpha = digamma(ta) - std::log(tb);
  const double e_ln_gamma = digamma(tc) - std::log(td);
  const double e_res = y * y - 2.0 * y * md * mu + (md * md + vd) * (mu * mu + sx);
  auto gamma_entropy = [](double k, double r) {
    return k - std::log(r) + std::lgamma(k) + (1.0 - k) * digamma(k);
  };
  double expected = 0.5 * (e_ln_gamma - ln2pi) - 0.5 * (tc / td) * e_res;
  expected += 0.5 * (e_ln_alpha - ln2pi) - 0.5 * (ta / tb) * (mu * mu + sx);
  expected += cfg.a * std::log(cfg.b) - std::lgamma(cfg.a) + (cfg.a - 1.0) * e_ln_alpha -
              cfg.b * ta / tb;
  expected += -0.5 * std::log(2.0 * std::numbers::pi * cfg.beta) - (md * md + vd) / (2.0 * cfg.beta);
  expected += cfg.c * std::log(cfg.d) - std::lgamma(cfg.c) + (cfg.c - 1.0) * e_ln_gamma -
              cfg.d * tc / td;
  expected += 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * sx);
  expected += 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * vd);
  expected += gamma_entropy(ta, tb) + gamma_entropy(tc, td);

  CHECK(compute_elbo(s, data, cfg) == doctest::Approx(expected).epsilon(1e-12));

  SUBCASE("diagonal dictionary covariance gives the same value") {
    s.dict_cov_diagonal = true;
    CHECK(compute_elbo(s, data, cfg) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("no coordinate update decreases the ELBO") {
  for (const Engine variant : {Engine::VbFull, Engine::VbAtomwise}) {
    CAPTURE(to_string(variant));
    SyntheticSpec spec;
    spec.M = 8;
    spec.N = 12;
    spec.L = 60;
    spec.snr_db = 20.0;
    spec.seed = 5;
    const SyntheticData syn = generate_synthetic(spec);
    const TrainingSet data{syn.Y};
    ModelConfig cfg;
    cfg.num_atoms = 12;
    cfg.seed = 2;
    VBState s = initialize_vb_state(cfg, data);
    double prev = compute_elbo(s, data, cfg);
    double worst = 0.0;
    auto step = [&](auto&& update) {
      update();
      const double now = compute_elbo(s, data, cfg);
      worst = std::max(worst, (prev - now) / std::abs(prev));
      prev = now;
    };
    for (int sweep = 0; sweep < 30; ++sweep) {
      step([&] { update_codes(s, data); });
      if (variant == Engine::VbFull) {
        step([&] { update_dictionary_full(s, data, cfg); });
      } else {
        step([&] { update_dictionary_atomwise(s, data, cfg); });
      }
      step([&] { update_alpha(s, cfg); });
      step([&] { update_gamma(s, data, cfg); });
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("a vanishing dictionary prior reduces the update to least squares") {
  auto [data, s] = random_instance(6, 3, 20, 81);
  const ModelConfig cfg = small_config(3, 1e30);
  const Eigen::MatrixXd outer = s.code_means * s.code_means.transpose() + s.code_cov_sum;
  const Eigen::MatrixXd mod =
      data.Y * s.code_means.transpose() * outer.fullPivLu().inverse();
  update_dictionary_full(s, data, cfg);
  CHECK(rel_diff(s.dict_mean, mod) < 1e-8);

  SUBCASE("and an infinite beta gives the same answer") {
    auto inst = random_instance(6, 3, 20, 81);
    update_dictionary_full(inst.state, inst.data, small_config(3, std::numeric_limits<double>::infinity()));
    CHECK(rel_diff(inst.state.dict_mean, mod) < 1e-8);
    CHECK(std::isfinite(compute_elbo(inst.state, inst.data,
                                     small_config(3, std::numeric_limits<double>::infinity()))));
  }
}

TEST_CASE("run_vb records one sweep per iteration and stops on tolerance") {
  SyntheticSpec spec;
  spec.M = 6;
  spec.N = 8;
  spec.L = 40;
  spec.snr_db = 30.0;
  spec.seed = 1;
  const TrainingSet data{generate_synthetic(spec).Y};
  ModelConfig cfg;
  cfg.num_atoms = 8;
  cfg.max_iters = 5;
  const VBResult capped = run_vb(cfg, data, Engine::VbFull);
  CHECK(capped.trace.sweeps.size() == 5);
  CHECK(capped.trace.max_iters_reached);
  CHECK(capped.trace.sweeps.back().iteration == 5);

  cfg.tol = 1e9;
  const VBResult loose = run_vb(cfg, data, Engine::VbAtomwise);
  CHECK(loose.trace.sweeps.size() == 1);
  CHECK(loose.trace.converged);

  CHECK_THROWS_AS(run_vb(cfg, data, Engine::Gibbs), Error);
}

TEST_CASE("run_vb is deterministic") {
  SyntheticSpec spec;
  spec.M = 5;
  spec.N = 6;
  spec.L = 30;
  spec.seed = 3;
  const TrainingSet data{generate_synthetic(spec).Y};
  ModelConfig cfg;
  cfg.num_atoms = 6;
  cfg.max_iters = 10;
  cfg.seed = 17;
  const VBResult a = run_vb(cfg, data, Engine::VbFull);
  const VBResult b = run_vb(cfg, data, Engine::VbFull);
  CHECK(a.state.dict_mean == b.state.dict_mean);
  CHECK(a.trace.sweeps.back().elbo == b.trace.sweeps.back().elbo);
}
