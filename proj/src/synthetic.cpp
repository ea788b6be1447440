#include "sbdl/synthetic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sbdl/error.hpp"
#include "sbdl/random.hpp"

namespace sbdl {

double snr_to_noise_std(const Eigen::MatrixXd& clean, double snr_db) {
  if (!std::isfinite(snr_db)) {
    throw Error(ErrorCode::InvalidArgument, "snr_db must be finite");
  }
  const double power = clean.squaredNorm() / static_cast<double>(clean.size());
  if (!(power > 0.0)) throw Error(ErrorCode::ZeroSignal, "clean signal has zero power");
  return std::sqrt(power / std::pow(10.0, snr_db / 10.0));
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  const auto& k = spec.sparsity;
  if (spec.M < 1 || spec.N < 1 || spec.L < 1 || k.k_min < 0 || k.k_min > k.k_max ||
      k.k_max > spec.N) {
    throw Error(ErrorCode::InvalidArgument,
                "invalid synthetic spec (need M, N, L >= 1 and 0 <= K_min <= K_max <= N)");
  }
  Rng rng(spec.seed);
  SyntheticData out;

  out.D_true.resize(spec.M, spec.N);
  for (Eigen::Index i = 0; i < out.D_true.size(); ++i) out.D_true.data()[i] = rng.normal();
  out.D_true.colwise().normalize();

  out.X_true = Eigen::MatrixXd::Zero(spec.N, spec.L);
  const auto span = static_cast<std::uint64_t>(k.k_max - k.k_min + 1);
  for (Eigen::Index l = 0; l < spec.L; ++l) {
    const Eigen::Index kl =
        k.is_fixed() ? k.k_min : k.k_min + static_cast<Eigen::Index>(rng.uniform_index(span));
    for (const auto n : rng.sample_without_replacement(spec.N, kl)) {
      double value = rng.normal();
      // Keep exactly K_l nonzeros.
      while (value == 0.0) value = rng.normal();
      out.X_true(n, l) = value;
    }
  }

  out.Y = out.D_true * out.X_true;
  if (std::isnan(spec.snr_db) || spec.snr_db == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorCode::InvalidArgument, "snr_db must be a number or +inf");
  }
  if (std::isfinite(spec.snr_db)) {
    out.sigma = snr_to_noise_std(out.Y, spec.snr_db);
    for (Eigen::Index i = 0; i < out.Y.size(); ++i) out.Y.data()[i] += out.sigma * rng.normal();
  }
  return out;
}

}  // namespace sbdl
