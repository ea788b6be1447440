#include "sbdl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "sbdl/error.hpp"

namespace sbdl {
namespace {

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

double atom_distance(const Eigen::VectorXd& d, const Eigen::VectorXd& dhat) {
  if (d.size() != dhat.size()) {
    throw Error(ErrorCode::ShapeMismatch, "atom lengths differ");
  }
  const double norms = d.norm() * dhat.norm();
  if (norms == 0.0) throw Error(ErrorCode::ZeroVector, "atom_distance of a zero vector");
  const double cosine = std::min(1.0, std::abs(d.dot(dhat)) / norms);
  return 1.0 - cosine;
}

RecoveryReport match_and_score(const Eigen::MatrixXd& true_dict, const Eigen::MatrixXd& learned,
                               double threshold) {
  if (true_dict.rows() != learned.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "true dictionary " + shape(true_dict) + " vs learned " + shape(learned));
  }
  struct Candidate {
    double distance;
    Eigen::Index t;
    Eigen::Index l;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(true_dict.cols() * learned.cols()));
  const Eigen::VectorXd true_norms = true_dict.colwise().norm();
  const Eigen::VectorXd learned_norms = learned.colwise().norm();
  for (Eigen::Index t = 0; t < true_dict.cols(); ++t) {
    for (Eigen::Index l = 0; l < learned.cols(); ++l) {
      const double norms = true_norms[t] * learned_norms[l];
      // A zero learned atom cannot match anything.
      const double distance =
          norms > 0.0 ? 1.0 - std::min(1.0, std::abs(true_dict.col(t).dot(learned.col(l))) / norms)
                      : 1.0;
      candidates.push_back({distance, t, l});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.distance, x.t, x.l) < std::tie(y.distance, y.t, y.l);
  });

  RecoveryReport report;
  report.threshold = threshold;
  std::vector<bool> true_taken(static_cast<std::size_t>(true_dict.cols()), false);
  std::vector<bool> learned_taken(static_cast<std::size_t>(learned.cols()), false);
  const auto wanted = std::min(true_dict.cols(), learned.cols());
  std::size_t successes = 0;
  for (const auto& c : candidates) {
    if (static_cast<Eigen::Index>(report.matched_pairs.size()) == wanted) break;
    if (true_taken[static_cast<std::size_t>(c.t)] || learned_taken[static_cast<std::size_t>(c.l)]) {
      continue;
    }
    true_taken[static_cast<std::size_t>(c.t)] = true;
    learned_taken[static_cast<std::size_t>(c.l)] = true;
    report.matched_pairs.push_back({c.t, c.l, c.distance});
    if (c.distance < threshold) ++successes;
  }
  report.success_rate = true_dict.cols() > 0 ? static_cast<double>(successes) /
                                                   static_cast<double>(true_dict.cols())
                                             : 0.0;
  return report;
}

double psnr(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& test) {
  if (clean.rows() != test.rows() || clean.cols() != test.cols() || clean.rows() != clean.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                "psnr needs equal square images, got " + shape(clean) + " and " + shape(test));
  }
  const double error = (test - clean).norm();
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  const auto q = static_cast<double>(clean.rows());
  return 20.0 * std::log10(255.0 * q * q / error);
}

double psnr_mse(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& test) {
  if (clean.rows() != test.rows() || clean.cols() != test.cols()) {
    throw Error(ErrorCode::ShapeMismatch, shape(clean) + " vs " + shape(test));
  }
  const double mse = (test - clean).squaredNorm() / static_cast<double>(clean.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double reconstruction_error(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& D,
                            const Eigen::MatrixXd& X) {
  if (D.cols() != X.rows() || D.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                "Y " + shape(Y) + ", D " + shape(D) + ", X " + shape(X) + " are not conformable");
  }
  return (Y - D * X).norm();
}

}  // namespace sbdl
