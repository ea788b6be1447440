#include "sbdl/workflows.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sbdl/error.hpp"
#include "sbdl/gibbs.hpp"
#include "sbdl/matrix_io.hpp"
#include "sbdl/metrics.hpp"
#include "sbdl/omp.hpp"
#include "sbdl/vb.hpp"

namespace sbdl {
namespace {

namespace fs = std::filesystem;

const std::set<std::string> kModelKeys = {"seed", "iters",   "burn_in", "thinning", "dict_estimate",
                                          "a",    "b",       "c",       "d",        "beta",
                                          "num_atoms", "tol"};

std::set<std::string> with_model_keys(std::set<std::string> keys) {
  keys.insert(kModelKeys.begin(), kModelKeys.end());
  return keys;
}

bool is_auto(const KeyValueConfig& cfg, const std::string& key) {
  return !cfg.has(key) || cfg.get_string(key, "") == "auto";
}

void echo_model(KeyValueList& echo, const ModelConfig& m) {
  echo.emplace_back("seed", std::to_string(m.seed));
  echo.emplace_back("iters", std::to_string(m.max_iters));
  echo.emplace_back("burn_in", std::to_string(m.burn_in));
  echo.emplace_back("thinning", std::to_string(m.thinning));
  echo.emplace_back("dict_estimate", to_string(m.dict_estimate));
  echo.emplace_back("a", format_double(m.a));
  echo.emplace_back("b", format_double(m.b));
  echo.emplace_back("c", format_double(m.c));
  echo.emplace_back("d", format_double(m.d));
  echo.emplace_back("beta", format_double(m.beta));
  echo.emplace_back("num_atoms", std::to_string(m.num_atoms));
  echo.emplace_back("tol", format_double(m.tol));
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) out += (out.empty() ? "" : ",") + item;
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

void finish(RunReport& report, const fs::path& out_dir,
            std::chrono::steady_clock::time_point start) {
  report.artifact_paths.push_back("config.cfg");
  report.artifact_paths.push_back("report.txt");
  write_text(out_dir / "config.cfg", format_config_echo(report));
  write_text(out_dir / "report.txt", format_report(report));
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Sparsity parse_sparsity(const std::string& text) {
  const auto dash = text.find('-');
  try {
    std::size_t used = 0;
    if (dash == std::string::npos) {
      const long k = std::stol(text, &used);
      if (used == text.size() && k >= 0) return Sparsity::fixed(k);
    } else {
      const long lo = std::stol(text.substr(0, dash), &used);
      std::size_t used_hi = 0;
      const long hi = std::stol(text.substr(dash + 1), &used_hi);
      if (used == dash && used_hi == text.size() - dash - 1 && lo >= 0 && lo <= hi) {
        return Sparsity::uniform_range(lo, hi);
      }
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ConfigParseError,
              "key 'sparsity': bad item '" + text + "' (expected K or Kmin-Kmax)");
}

Eigen::Index patch_side_for(const Eigen::MatrixXd& dict) {
  const auto side = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(dict.rows()))));
  if (side * side != dict.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "dictionary has " + std::to_string(dict.rows()) +
                                                  " rows, not a square patch size");
  }
  return side;
}

}  // namespace

std::string format_report(const RunReport& report) {
  std::ostringstream out;
  out << "sbdl " << report.command << " report\n\n[config]\n";
  for (const auto& [k, v] : report.config_echo) out << k << " = " << v << '\n';
  out << "\n[metrics]\n";
  for (const auto& [k, v] : report.metrics) out << k << " = " << v << '\n';
  out << "\n[artifacts]\n";
  for (const auto& path : report.artifact_paths) out << path << '\n';
  out << "\n--- begin table ---\nsection\tkey\tvalue\n";
  out << "command\tcommand\t" << report.command << '\n';
  for (const auto& [k, v] : report.config_echo) out << "config\t" << k << '\t' << v << '\n';
  for (const auto& [k, v] : report.metrics) out << "metric\t" << k << '\t' << v << '\n';
  for (const auto& path : report.artifact_paths) out << "artifact\tpath\t" << path << '\n';
  out << "--- end table ---\n";
  return out.str();
}

std::string format_config_echo(const RunReport& report) {
  std::string out = "# sbdl " + report.command + " configuration\n";
  for (const auto& [k, v] : report.config_echo) out += k + " = " + v + "\n";
  return out;
}

double default_beta(Engine engine) { return engine == Engine::Gibbs ? 1.0 : 1e8; }
int default_iterations(Engine engine) { return engine == Engine::Gibbs ? 300 : 500; }

ModelConfig resolve_model_config(const KeyValueConfig& cfg, Engine engine, long default_atoms) {
  ModelConfig m;
  m.seed = cfg.get_u64("seed", 0);
  m.max_iters = static_cast<int>(is_auto(cfg, "iters") ? default_iterations(engine)
                                                       : cfg.get_int("iters", 0));
  m.dict_estimate = parse_dict_estimate(cfg.get_string("dict_estimate", "last_sample"));
  m.thinning = static_cast<int>(cfg.get_int("thinning", 1));
  if (engine == Engine::Gibbs) {
    // Keep exactly what the estimate needs unless told otherwise.
    const int tail = m.dict_estimate.kind == DictEstimate::Kind::AverageTail ? m.dict_estimate.tail : 1;
    m.burn_in = static_cast<int>(is_auto(cfg, "burn_in") ? std::max(0, m.max_iters - tail * m.thinning)
                                                         : cfg.get_int("burn_in", 0));
  } else {
    m.burn_in = static_cast<int>(is_auto(cfg, "burn_in") ? 0 : cfg.get_int("burn_in", 0));
  }
  m.a = cfg.get_double("a", m.a);
  m.b = cfg.get_double("b", m.b);
  m.c = cfg.get_double("c", m.c);
  m.d = cfg.get_double("d", m.d);
  m.beta = is_auto(cfg, "beta") ? default_beta(engine) : cfg.get_double("beta", 0.0);
  m.num_atoms = static_cast<int>(cfg.get_int("num_atoms", default_atoms));
  m.tol = cfg.get_double("tol", m.tol);
  return m;
}

LearnedDictionary learn_dictionary(const ModelConfig& cfg, const TrainingSet& data, Engine engine) {
  LearnedDictionary out;
  if (engine == Engine::Gibbs) {
    auto result = run_gibbs(cfg, data);
    out.dictionary = estimate_dictionary(result.trace, cfg.dict_estimate);
    out.codes = result.state.X;
    out.iterations = cfg.max_iters;
    out.noise_std = 1.0 / std::sqrt(result.state.gamma);
    out.trace_columns = {"iteration", "residual", "gamma"};
    for (std::size_t i = 0; i < result.trace.residual_per_iter.size(); ++i) {
      out.trace_rows.push_back({static_cast<double>(i + 1), result.trace.residual_per_iter[i],
                                result.trace.gamma_per_iter[i]});
    }
    return out;
  }
  auto result = run_vb(cfg, data, engine);
  out.dictionary = result.state.dict_mean;
  out.codes = result.state.code_means;
  out.noise_std = 1.0 / std::sqrt(result.state.gamma_mean());
  out.iterations = static_cast<int>(result.trace.sweeps.size());
  out.converged = result.trace.converged;
  out.elbo_final = result.trace.sweeps.empty() ? 0.0 : result.trace.sweeps.back().elbo;
  out.trace_columns = {"iteration", "elbo", "dict_change"};
  for (const auto& s : result.trace.sweeps) {
    out.trace_rows.push_back({static_cast<double>(s.iteration), s.elbo, s.dict_change});
  }
  return out;
}

std::uint64_t engine_seed_for(std::uint64_t trial_seed) {
  // splitmix64 finalizer
  std::uint64_t z = trial_seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double recovery_trial(const SyntheticSpec& spec, const ModelConfig& cfg, Engine engine,
                      double threshold) {
  const SyntheticData data = generate_synthetic(spec);
  const LearnedDictionary learned = learn_dictionary(cfg, TrainingSet{data.Y}, engine);
  return match_and_score(data.D_true, learned.dictionary, threshold).success_rate;
}

DenoiseResult denoise_image(const Image& noisy, const Eigen::MatrixXd& dict, double sigma,
                            double gain, bool remove_mean) {
  if (!(sigma >= 0.0) || !(gain >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sigma and gain must be non-negative");
  }
  const Eigen::Index side = patch_side_for(dict);
  Patches patches = extract_patches(noisy, side, 1);
  Eigen::RowVectorXd means;
  if (remove_mean) means = remove_column_means(patches.signals);

  OmpStop stop;
  stop.residual_threshold = gain * sigma * std::sqrt(static_cast<double>(dict.rows()));
  const auto codes = batch_encode(dict, patches.signals, stop);

  Eigen::MatrixXd cleaned(patches.signals.rows(), patches.signals.cols());
  double atoms = 0.0;
  for (std::size_t p = 0; p < codes.size(); ++p) {
    const auto col = static_cast<Eigen::Index>(p);
    cleaned.col(col) = dict * to_dense(codes[p], dict.cols());
    if (remove_mean) cleaned.col(col).array() += means[col];
    atoms += static_cast<double>(codes[p].support.size());
  }
  DenoiseResult result;
  result.denoised = reassemble_image(cleaned, patches.grid);
  result.mean_atoms_per_patch = codes.empty() ? 0.0 : atoms / static_cast<double>(codes.size());
  return result;
}

RunReport bench_synthetic(const KeyValueConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  cfg.reject_unknown(with_model_keys({"engines", "M", "N", "L", "snr_db", "sparsity", "trials",
                                      "threshold"}));
  RunReport report;
  report.command = "bench-synthetic";

  const auto engine_names = cfg.get_list("engines", {"gibbs"});
  std::vector<Engine> engines;
  for (const auto& name : engine_names) engines.push_back(parse_engine(name));
  const long m = cfg.get_int("M", 20);
  const long n = cfg.get_int("N", 50);
  const auto l_items = cfg.get_list("L", {"1000"});
  const auto snr_items = cfg.get_list("snr_db", {"30"});
  const auto k_items = cfg.get_list("sparsity", {"3"});
  const long trials = cfg.get_int("trials", 5);
  const double threshold = cfg.get_double("threshold", kRecoveryThreshold);
  if (m < 1 || n < 1 || trials < 1) {
    throw Error(ErrorCode::ConfigParseError, "M, N and trials must be positive");
  }
  std::vector<long> l_values;
  for (const auto& item : l_items) {
    KeyValueConfig one;
    one.set("L", item);
    l_values.push_back(one.get_int("L", 0));
  }
  std::vector<double> snr_values;
  for (const auto& item : snr_items) {
    KeyValueConfig one;
    one.set("snr_db", item);
    snr_values.push_back(one.get_double("snr_db", 0.0));
  }
  std::vector<Sparsity> k_values;
  for (const auto& item : k_items) k_values.push_back(parse_sparsity(item));

  const bool single_engine = engines.size() == 1;
  // Resolve once per engine up front so bad settings fail before any work.
  std::vector<ModelConfig> models;
  for (const auto engine : engines) models.push_back(resolve_model_config(cfg, engine, n));

  auto& echo = report.config_echo;
  echo.emplace_back("engines", join(engine_names));
  echo.emplace_back("M", std::to_string(m));
  echo.emplace_back("N", std::to_string(n));
  echo.emplace_back("L", join(l_items));
  echo.emplace_back("snr_db", join(snr_items));
  echo.emplace_back("sparsity", join(k_items));
  echo.emplace_back("trials", std::to_string(trials));
  echo.emplace_back("threshold", format_double(threshold));
  if (single_engine) {
    echo_model(echo, models.front());
  } else {
    // Engine-dependent defaults stay "auto"; the table records the resolved values.
    ModelConfig shared = models.front();
    echo_model(echo, shared);
    for (auto& [key, value] : echo) {
      if ((key == "iters" || key == "burn_in" || key == "beta") && is_auto(cfg, key)) value = "auto";
    }
  }

  std::ostringstream table;
  std::ostringstream raw;
  table << "L\tsnr_db\tsparsity\tengine\tbeta\titers\tburn_in\ttrials\tfailures\tmean_success_rate\n";
  raw << "L\tsnr_db\tsparsity\tengine\ttrial\tseed\tsuccess_rate\tstatus\n";
  for (std::size_t li = 0; li < l_values.size(); ++li) {
    for (std::size_t si = 0; si < snr_values.size(); ++si) {
      for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
        for (std::size_t ei = 0; ei < engines.size(); ++ei) {
          double total = 0.0;
          int failures = 0;
          for (long t = 0; t < trials; ++t) {
            SyntheticSpec spec;
            spec.M = m;
            spec.N = n;
            spec.L = l_values[li];
            spec.sparsity = k_values[ki];
            spec.snr_db = snr_values[si];
            spec.seed = models[ei].seed + static_cast<std::uint64_t>(t);
            ModelConfig model = models[ei];
            model.seed = engine_seed_for(spec.seed);
            std::string status = "ok";
            double rate = 0.0;
            try {
              rate = recovery_trial(spec, model, engines[ei], threshold);
            } catch (const Error& e) {
              status = e.what();
              ++failures;
            }
            total += rate;
            raw << l_items[li] << '\t' << snr_items[si] << '\t' << k_items[ki] << '\t'
                << engine_names[ei] << '\t' << t << '\t' << spec.seed << '\t' << format_double(rate)
                << '\t' << status << '\n';
          }
          report.nonfatal_failures += failures;
          table << l_items[li] << '\t' << snr_items[si] << '\t' << k_items[ki] << '\t'
                << engine_names[ei] << '\t' << format_double(models[ei].beta) << '\t'
                << models[ei].max_iters << '\t' << models[ei].burn_in << '\t' << trials << '\t'
                << failures << '\t' << format_double(total / static_cast<double>(trials)) << '\n';
          report.metrics.emplace_back("success_rate[L=" + l_items[li] + ",snr_db=" + snr_items[si] +
                                          ",sparsity=" + k_items[ki] + ",engine=" +
                                          engine_names[ei] + "]",
                                      format_double(total / static_cast<double>(trials)));
        }
      }
    }
  }
  report.metrics.emplace_back("failed_trials", std::to_string(report.nonfatal_failures));

  fs::create_directories(out_dir);
  write_text(out_dir / "table.tsv", table.str());
  write_text(out_dir / "trials.tsv", raw.str());
  report.artifact_paths.push_back("table.tsv");
  report.artifact_paths.push_back("trials.tsv");
  finish(report, out_dir, start);
  return report;
}

RunReport train(const KeyValueConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  cfg.reject_unknown(with_model_keys({"engine", "input", "image", "stride", "patch_size", "remove_mean"}));
  RunReport report;
  report.command = "train";
  const Engine engine = parse_engine(cfg.get_string("engine", "gibbs"));
  auto& echo = report.config_echo;
  echo.emplace_back("engine", std::string(to_string(engine)));

  TrainingSet data;
  long default_atoms = 0;
  if (cfg.has("image") == cfg.has("input")) {
    throw Error(ErrorCode::ConfigParseError, "train needs exactly one of 'input' or 'image'");
  }
  if (cfg.has("image")) {
    const std::string path = cfg.require_string("image");
    const long stride = cfg.get_int("stride", 2);
    const long patch = cfg.get_int("patch_size", 8);
    const bool remove_mean = cfg.get_bool("remove_mean", false);
    Patches patches = extract_patches(load_pgm(path), patch, stride);
    if (remove_mean) remove_column_means(patches.signals);
    data.Y = std::move(patches.signals);
    default_atoms = 256;
    echo.emplace_back("image", path);
    echo.emplace_back("stride", std::to_string(stride));
    echo.emplace_back("patch_size", std::to_string(patch));
    echo.emplace_back("remove_mean", remove_mean ? "true" : "false");
  } else {
    const std::string path = cfg.require_string("input");
    data.Y = read_matrix(path);
    echo.emplace_back("input", path);
  }
  if (!cfg.has("num_atoms") && default_atoms == 0) {
    throw Error(ErrorCode::ConfigParseError, "key 'num_atoms' is required for matrix input");
  }
  const ModelConfig model = resolve_model_config(cfg, engine, default_atoms);
  echo_model(echo, model);

  const LearnedDictionary learned = learn_dictionary(model, data, engine);

  fs::create_directories(out_dir);
  write_matrix(learned.dictionary, out_dir / "dictionary.txt");
  std::string trace;
  for (std::size_t i = 0; i < learned.trace_columns.size(); ++i) {
    trace += (i ? "\t" : "") + learned.trace_columns[i];
  }
  trace += '\n';
  for (const auto& row : learned.trace_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      trace += (i ? "\t" : "") + (i == 0 ? std::to_string(static_cast<long>(row[i])) : format_double(row[i]));
    }
    trace += '\n';
  }
  write_text(out_dir / "trace.tsv", trace);
  write_text(out_dir / "noise_std.txt", format_double(learned.noise_std) + "\n");
  report.artifact_paths.push_back("dictionary.txt");
  report.artifact_paths.push_back("trace.tsv");
  report.artifact_paths.push_back("noise_std.txt");

  report.metrics.emplace_back("signals", std::to_string(data.num_signals()));
  report.metrics.emplace_back("signal_dim", std::to_string(data.signal_dim()));
  report.metrics.emplace_back("iterations_run", std::to_string(learned.iterations));
  report.metrics.emplace_back("noise_std", format_double(learned.noise_std));
  report.metrics.emplace_back("final_residual",
                              format_double((data.Y - learned.dictionary * learned.codes).norm()));
  if (engine != Engine::Gibbs) {
    report.metrics.emplace_back("elbo_final", format_double(learned.elbo_final));
    report.metrics.emplace_back("converged", learned.converged ? "true" : "false");
  }
  finish(report, out_dir, start);
  return report;
}

RunReport denoise(const KeyValueConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  cfg.reject_unknown({"dictionary", "noisy", "sigma", "gain", "clean", "remove_mean"});
  RunReport report;
  report.command = "denoise";
  const std::string dict_path = cfg.require_string("dictionary");
  const std::string noisy_path = cfg.require_string("noisy");
  // Without a known noise level, use the one the training run inferred.
  double sigma = 0.0;
  if (cfg.has("sigma")) {
    sigma = cfg.get_double("sigma", 0.0);
  } else {
    const fs::path learned = fs::path(dict_path).parent_path() / "noise_std.txt";
    std::ifstream in(learned);
    if (!(in >> sigma)) {
      throw Error(ErrorCode::ConfigParseError,
                  "key 'sigma' is required (no " + learned.string() + " next to the dictionary)");
    }
  }
  const double gain = cfg.get_double("gain", 1.15);
  const bool remove_mean = cfg.get_bool("remove_mean", false);
  const std::string clean_path = cfg.get_string("clean", "");

  auto& echo = report.config_echo;
  echo.emplace_back("dictionary", dict_path);
  echo.emplace_back("noisy", noisy_path);
  echo.emplace_back("sigma", format_double(sigma));
  echo.emplace_back("gain", format_double(gain));
  echo.emplace_back("remove_mean", remove_mean ? "true" : "false");
  if (!clean_path.empty()) echo.emplace_back("clean", clean_path);

  const Eigen::MatrixXd dict = read_matrix(dict_path);
  const Image noisy = load_pgm(noisy_path);
  const DenoiseResult result = denoise_image(noisy, dict, sigma, gain, remove_mean);

  fs::create_directories(out_dir);
  save_pgm(result.denoised, out_dir / "denoised.pgm");
  report.artifact_paths.push_back("denoised.pgm");
  report.metrics.emplace_back("mean_atoms_per_patch", format_double(result.mean_atoms_per_patch));
  if (!clean_path.empty()) {
    const Image clean = load_pgm(clean_path);
    // Scored on the image as written, i.e. after 8-bit rounding.
    const Image written = result.denoised.array().round().cwiseMax(0.0).cwiseMin(255.0);
    const double out_psnr = psnr(clean, written);
    const double in_psnr = psnr(clean, noisy);
    report.metrics.emplace_back("psnr", format_double(out_psnr));
    report.metrics.emplace_back("psnr_mse", format_double(psnr_mse(clean, written)));
    report.metrics.emplace_back("noisy_psnr", format_double(in_psnr));
    report.metrics.emplace_back("psnr_gain", format_double(out_psnr - in_psnr));
  }
  finish(report, out_dir, start);
  return report;
}

RunReport add_noise(const KeyValueConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  cfg.reject_unknown({"clean", "sigma", "seed"});
  RunReport report;
  report.command = "add-noise";
  const std::string clean_path = cfg.require_string("clean");
  if (!cfg.has("sigma")) throw Error(ErrorCode::ConfigParseError, "key 'sigma' is required");
  const double sigma = cfg.get_double("sigma", 0.0);
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  report.config_echo = {{"clean", clean_path}, {"sigma", format_double(sigma)},
                        {"seed", std::to_string(seed)}};

  const Image clean = load_pgm(clean_path);
  const Image noisy = add_gaussian_noise(clean, sigma, seed);
  fs::create_directories(out_dir);
  save_pgm(noisy, out_dir / "noisy.pgm");
  report.artifact_paths.push_back("noisy.pgm");
  const Image written = noisy.array().round().cwiseMax(0.0).cwiseMin(255.0);
  report.metrics.emplace_back("psnr", format_double(psnr(clean, written)));
  finish(report, out_dir, start);
  return report;
}

}  // namespace sbdl
