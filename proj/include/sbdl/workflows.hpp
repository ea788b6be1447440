#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sbdl/config.hpp"
#include "sbdl/image.hpp"
#include "sbdl/model.hpp"
#include "sbdl/synthetic.hpp"

namespace sbdl {

using KeyValueList = std::vector<std::pair<std::string, std::string>>;

struct RunReport {
  std::string command;
  KeyValueList config_echo;  // every setting that shaped the run, defaults included
  KeyValueList metrics;
  std::vector<std::string> artifact_paths;  // relative to the output directory
  double wall_time_seconds = 0.0;
  int nonfatal_failures = 0;
};

/// Report file body: readable sections followed by a tab-delimited block
/// between "--- begin table ---" and "--- end table ---". Wall time is left
/// out so reruns produce identical files.
std::string format_report(const RunReport& report);

/// The echoed configuration as a loadable `key = value` file.
std::string format_config_echo(const RunReport& report);

// Engine-dependent defaults used when a key is absent or set to "auto".
double default_beta(Engine engine);      // 1e8 for VB, 1 for Gibbs
int default_iterations(Engine engine);   // 500 for VB, 300 for Gibbs

/// Resolves the model keys (seed, iters, burn_in, thinning, dict_estimate,
/// a, b, c, d, beta, num_atoms, tol) for one engine.
ModelConfig resolve_model_config(const KeyValueConfig& cfg, Engine engine, long default_atoms);

struct LearnedDictionary {
  Eigen::MatrixXd dictionary;
  Eigen::MatrixXd codes;  // <X> for VB, last sample for Gibbs
  int iterations = 0;
  bool converged = false;
  double elbo_final = 0.0;  // VB only
  double noise_std = 0.0;   // 1/sqrt(gamma): posterior mean for VB, last sample for Gibbs
  std::vector<std::vector<double>> trace_rows;
  std::vector<std::string> trace_columns;
};

/// Runs the chosen engine and reads off its dictionary estimate.
LearnedDictionary learn_dictionary(const ModelConfig& cfg, const TrainingSet& data, Engine engine);

/// One recovery trial: generate data from `spec`, learn with `engine` and
/// score against the generating dictionary.
double recovery_trial(const SyntheticSpec& spec, const ModelConfig& cfg, Engine engine,
                      double threshold = 0.01);

/// Engine seed for a trial, decorrelated from the data seed of the same trial.
std::uint64_t engine_seed_for(std::uint64_t trial_seed);

struct DenoiseResult {
  Image denoised;
  double mean_atoms_per_patch = 0.0;
};

/// Codes every stride-1 patch with OMP at threshold gain * sigma * patch_size
/// and averages the overlapping reconstructions.
DenoiseResult denoise_image(const Image& noisy, const Eigen::MatrixXd& dict, double sigma,
                            double gain = 1.15, bool remove_mean = false);

// Command implementations. Each writes its artifacts, report.txt and
// config.cfg into out_dir.
RunReport bench_synthetic(const KeyValueConfig& cfg, const std::filesystem::path& out_dir);
RunReport train(const KeyValueConfig& cfg, const std::filesystem::path& out_dir);
RunReport denoise(const KeyValueConfig& cfg, const std::filesystem::path& out_dir);
RunReport add_noise(const KeyValueConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace sbdl
