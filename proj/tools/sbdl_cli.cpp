// sbdl: sparse Bayesian dictionary learning experiments.
//
//   sbdl bench-synthetic --config bench.cfg --out results/bench
//   sbdl train --engine gibbs --image barbara.pgm --out results/dict
//   sbdl denoise --dictionary results/dict/dictionary.txt --noisy n.pgm --sigma 25 --out d
//
// Settings come from an optional key = value file; flags override it.
// Exit status: 0 on success (per-trial failures included), 1 on a fatal
// error, 2 on a usage error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sbdl/config.hpp"
#include "sbdl/error.hpp"
#include "sbdl/matrix_io.hpp"
#include "sbdl/workflows.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out = "sbdl-out";
  std::vector<std::string> assignments;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<std::string> iters;
  std::optional<std::string> burn_in;
  std::optional<std::string> sigma;
  std::optional<std::string> gain;
  std::optional<std::string> clean;
  std::optional<std::string> input;
  std::optional<std::string> image;
  std::optional<std::string> dictionary;
  std::optional<std::string> noisy;
};

void add_shared(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "key = value settings file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--set", o.assignments, "extra setting, key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "base random seed");
}

void add_model(CLI::App* cmd, Options& o) {
  cmd->add_option("--engine", o.engine, "vb-full | vb-atomwise | gibbs");
  cmd->add_option("--iters", o.iters, "iterations (VB sweeps or Gibbs iterations)");
  cmd->add_option("--burn-in", o.burn_in, "Gibbs iterations discarded before keeping dictionaries");
}

sbdl::KeyValueConfig build_config(const Options& o, const std::string& engine_key) {
  sbdl::KeyValueConfig cfg;
  if (!o.config_path.empty()) cfg = sbdl::KeyValueConfig::load(o.config_path);
  for (const auto& a : o.assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw sbdl::Error(sbdl::ErrorCode::ConfigParseError, "--set expects key=value, got '" + a + "'");
    }
    cfg.set(a.substr(0, eq), a.substr(eq + 1));
  }
  auto put = [&](const char* key, const std::optional<std::string>& v) {
    if (v) cfg.set(key, *v);
  };
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  put(engine_key.c_str(), o.engine);
  put("iters", o.iters);
  put("burn_in", o.burn_in);
  put("sigma", o.sigma);
  put("gain", o.gain);
  put("clean", o.clean);
  put("input", o.input);
  put("image", o.image);
  put("dictionary", o.dictionary);
  put("noisy", o.noisy);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian dictionary learning"};
  app.require_subcommand(1);
  Options o;

  auto* bench = app.add_subcommand("bench-synthetic", "dictionary recovery on synthetic data");
  add_shared(bench, o);
  add_model(bench, o);

  auto* train = app.add_subcommand("train", "learn a dictionary from a matrix or an image");
  add_shared(train, o);
  add_model(train, o);
  train->add_option("--input", o.input, "training matrix (text format)");
  train->add_option("--image", o.image, "training image (binary PGM)");

  auto* denoise = app.add_subcommand("denoise", "denoise an image with a learned dictionary");
  add_shared(denoise, o);
  denoise->add_option("--dictionary", o.dictionary, "dictionary matrix (text format)");
  denoise->add_option("--noisy", o.noisy, "noisy image (binary PGM)");
  denoise->add_option("--sigma", o.sigma, "noise standard deviation");
  denoise->add_option("--gain", o.gain, "OMP threshold gain (default 1.15)");
  denoise->add_option("--clean", o.clean, "clean reference for PSNR");

  auto* noise = app.add_subcommand("add-noise", "add seeded Gaussian noise to an image");
  add_shared(noise, o);
  noise->add_option("--clean", o.clean, "clean image (binary PGM)");
  noise->add_option("--sigma", o.sigma, "noise standard deviation");

  CLI11_PARSE(app, argc, argv);

  try {
    sbdl::RunReport report;
    if (bench->parsed()) {
      report = sbdl::bench_synthetic(build_config(o, "engines"), o.out);
    } else if (train->parsed()) {
      report = sbdl::train(build_config(o, "engine"), o.out);
    } else if (denoise->parsed()) {
      report = sbdl::denoise(build_config(o, "engine"), o.out);
    } else {
      report = sbdl::add_noise(build_config(o, "engine"), o.out);
    }
    std::cout << sbdl::format_report(report);
    std::cout << "\nwall_time_seconds = " << sbdl::format_double(report.wall_time_seconds) << '\n';
    if (report.nonfatal_failures > 0) {
      std::cerr << "sbdl: " << report.nonfatal_failures << " trial(s) failed; see trials.tsv\n";
    }
    return 0;
  } catch (const sbdl::Error& e) {
    std::cerr << "sbdl: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sbdl: error: " << e.what() << '\n';
    return 1;
  }
}
