#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace sbdl {

/// Seeded pseudorandom source with portable variate generation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms unspecified, and
/// every experiment in this library must be bit-reproducible from its seed
/// regardless of the standard library it was compiled against.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Gamma(shape, rate) in the shape-rate parameterization (mean shape/rate).
  double gamma(double shape, double rate);

  Eigen::VectorXd normal_vector(Eigen::Index n);

  /// k distinct indices drawn uniformly from [0, n), in draw order.
  std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k);

  bool operator==(const Rng& other) const = default;

 private:
  double standard_gamma(double shape);

  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sbdl
