#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sbdl/error.hpp"
#include "sbdl/gibbs.hpp"
#include "sbdl/image.hpp"
#include "sbdl/metrics.hpp"
#include "sbdl/model.hpp"
#include "sbdl/omp.hpp"
#include "sbdl/synthetic.hpp"
#include "sbdl/vb.hpp"
#include "sbdl/workflows.hpp"

namespace py = pybind11;
using namespace sbdl;

namespace {

ModelConfig make_config(int num_atoms, Engine engine, int iters, std::uint64_t seed,
                        std::optional<double> beta, int burn_in, double a, double b, double c,
                        double d, double tol, const std::string& dict_estimate) {
  ModelConfig cfg;
  cfg.num_atoms = num_atoms;
  cfg.max_iters = iters > 0 ? iters : default_iterations(engine);
  cfg.seed = seed;
  cfg.beta = beta.value_or(default_beta(engine));
  cfg.burn_in = burn_in >= 0 ? burn_in : (engine == Engine::Gibbs ? cfg.max_iters - 1 : 0);
  cfg.a = a;
  cfg.b = b;
  cfg.c = c;
  cfg.d = d;
  cfg.tol = tol;
  cfg.dict_estimate = parse_dict_estimate(dict_estimate);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_sbdl, m) {
  m.doc() = "Sparse Bayesian dictionary learning (VB and Gibbs) with OMP coding.";

  py::register_exception<Error>(m, "SbdlError", PyExc_ValueError);

  m.def(
      "generate_synthetic",
      [](Eigen::Index M, Eigen::Index N, Eigen::Index L, Eigen::Index k_min,
         std::optional<Eigen::Index> k_max, double snr_db, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.M = M;
        spec.N = N;
        spec.L = L;
        spec.sparsity = Sparsity::uniform_range(k_min, k_max.value_or(k_min));
        spec.snr_db = snr_db;
        spec.seed = seed;
        const SyntheticData data = generate_synthetic(spec);
        return py::dict(py::arg("D") = data.D_true, py::arg("X") = data.X_true,
                        py::arg("Y") = data.Y, py::arg("sigma") = data.sigma);
      },
      py::arg("M") = 20, py::arg("N") = 50, py::arg("L") = 1000, py::arg("k") = 3,
      py::arg("k_max") = py::none(), py::arg("snr_db") = std::numeric_limits<double>::infinity(),
      py::arg("seed") = 0,
      "Draws a unit-norm dictionary, k-sparse codes and Y = D X + noise at the given SNR.");

  m.def(
      "learn_dictionary",
      [](const Eigen::MatrixXd& Y, int num_atoms, const std::string& engine_name, int iters,
         std::uint64_t seed, std::optional<double> beta, int burn_in, double a, double b, double c,
         double d, double tol, const std::string& dict_estimate) {
        const Engine engine = parse_engine(engine_name);
        const ModelConfig cfg = make_config(num_atoms, engine, iters, seed, beta, burn_in, a, b,
                                            c, d, tol, dict_estimate);
        LearnedDictionary learned;
        {
          py::gil_scoped_release release;
          learned = learn_dictionary(cfg, TrainingSet{Y}, engine);
        }
        return py::dict(py::arg("dictionary") = learned.dictionary,
                        py::arg("codes") = learned.codes,
                        py::arg("iterations") = learned.iterations,
                        py::arg("converged") = learned.converged,
                        py::arg("elbo") = learned.elbo_final,
                        py::arg("trace_columns") = learned.trace_columns,
                        py::arg("trace") = learned.trace_rows);
      },
      py::arg("Y"), py::arg("num_atoms"), py::arg("engine") = "gibbs", py::arg("iters") = 0,
      py::arg("seed") = 0, py::arg("beta") = py::none(), py::arg("burn_in") = -1,
      py::arg("a") = 0.5, py::arg("b") = 1e-6, py::arg("c") = 0.5, py::arg("d") = 1e-6,
      py::arg("tol") = 1e-6, py::arg("dict_estimate") = "last_sample",
      "Learns an M x num_atoms dictionary with 'vb-full', 'vb-atomwise' or 'gibbs'.\n"
      "iters=0 and beta=None pick the engine defaults.");

  py::class_<SparseCode>(m, "SparseCode")
      .def_readonly("support", &SparseCode::support)
      .def_readonly("coeffs", &SparseCode::coeffs)
      .def_readonly("residual_norm", &SparseCode::residual_norm)
      .def_readonly("dictionary_normalized", &SparseCode::dictionary_normalized)
      .def("to_dense", &to_dense, py::arg("num_atoms"));

  m.def(
      "omp",
      [](const Eigen::MatrixXd& dict, const Eigen::VectorXd& y, std::optional<Eigen::Index> k,
         std::optional<double> tol) { return omp_encode(dict, y, OmpStop{k, tol}); },
      py::arg("dictionary"), py::arg("y"), py::arg("max_sparsity") = py::none(),
      py::arg("residual_threshold") = py::none());

  m.def(
      "omp_batch",
      [](const Eigen::MatrixXd& dict, const Eigen::MatrixXd& signals,
         std::optional<Eigen::Index> k, std::optional<double> tol) {
        const auto codes = batch_encode(dict, signals, OmpStop{k, tol});
        Eigen::MatrixXd dense(dict.cols(), signals.cols());
        for (std::size_t p = 0; p < codes.size(); ++p) {
          dense.col(static_cast<Eigen::Index>(p)) = to_dense(codes[p], dict.cols());
        }
        return dense;
      },
      py::arg("dictionary"), py::arg("signals"), py::arg("max_sparsity") = py::none(),
      py::arg("residual_threshold") = py::none(), "Dense N x P code matrix.");

  m.def("atom_distance", &atom_distance, py::arg("d"), py::arg("dhat"));
  m.def(
      "match_and_score",
      [](const Eigen::MatrixXd& truth, const Eigen::MatrixXd& learned, double threshold) {
        const RecoveryReport r = match_and_score(truth, learned, threshold);
        py::list pairs;
        for (const auto& p : r.matched_pairs) {
          pairs.append(py::make_tuple(p.true_index, p.learned_index, p.distance));
        }
        return py::dict(py::arg("success_rate") = r.success_rate, py::arg("pairs") = pairs,
                        py::arg("threshold") = r.threshold);
      },
      py::arg("true_dict"), py::arg("learned"), py::arg("threshold") = kRecoveryThreshold);
  m.def("psnr", &psnr, py::arg("clean"), py::arg("test"));
  m.def("psnr_mse", &psnr_mse, py::arg("clean"), py::arg("test"));

  m.def("load_pgm", [](const std::string& path) { return load_pgm(path); }, py::arg("path"));
  m.def("save_pgm", [](const Image& img, const std::string& path) { save_pgm(img, path); },
        py::arg("image"), py::arg("path"));
  m.def(
      "extract_patches",
      [](const Image& img, Eigen::Index patch_size, Eigen::Index stride) {
        return extract_patches(img, patch_size, stride).signals;
      },
      py::arg("image"), py::arg("patch_size") = 8, py::arg("stride") = 1);
  m.def(
      "reassemble_image",
      [](const Eigen::MatrixXd& patches, Eigen::Index image_size, Eigen::Index patch_size,
         Eigen::Index stride, bool clamp) {
        const PatchGrid grid =
            extract_patches(Image::Zero(image_size, image_size), patch_size, stride).grid;
        return reassemble_image(patches, grid, clamp);
      },
      py::arg("patches"), py::arg("image_size"), py::arg("patch_size") = 8, py::arg("stride") = 1,
      py::arg("clamp") = true);
  m.def("add_gaussian_noise", &add_gaussian_noise, py::arg("image"), py::arg("sigma"),
        py::arg("seed") = 0);
  m.def(
      "denoise",
      [](const Image& noisy, const Eigen::MatrixXd& dict, double sigma, double gain,
         bool remove_mean) {
        py::gil_scoped_release release;
        return denoise_image(noisy, dict, sigma, gain, remove_mean).denoised;
      },
      py::arg("noisy"), py::arg("dictionary"), py::arg("sigma"), py::arg("gain") = 1.15,
      py::arg("remove_mean") = false);
}
