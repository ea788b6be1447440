#include "sbdl/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "sbdl/error.hpp"
#include "sbdl/random.hpp"

namespace sbdl {
namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  int ch = in.get();
  for (;;) {
    while (ch != EOF && std::isspace(ch)) ch = in.get();
    if (ch != '#') break;
    while (ch != EOF && ch != '\n' && ch != '\r') ch = in.get();
  }
  while (ch != EOF && !std::isspace(ch) && ch != '#') {
    token.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  if (ch == '#') in.unget();
  // The single whitespace after maxval is consumed here as the terminator.
  return token;
}

long parse_header_number(std::istream& in, const char* field) {
  const std::string token = header_token(in);
  if (token.empty() || !std::all_of(token.begin(), token.end(), ::isdigit) || token.size() > 9) {
    throw Error(ErrorCode::MalformedHeader, std::string("bad ") + field + " '" + token + "'");
  }
  return std::stol(token);
}

}  // namespace

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  if (header_token(in) != "P5") {
    throw Error(ErrorCode::MalformedHeader, path.string() + " is not a binary PGM (P5)");
  }
  const long width = parse_header_number(in, "width");
  const long height = parse_header_number(in, "height");
  const long maxval = parse_header_number(in, "maxval");
  if (width < 1 || height < 1) throw Error(ErrorCode::MalformedHeader, "empty image");
  if (maxval != 255) {
    throw Error(ErrorCode::UnsupportedMaxval, "maxval " + std::to_string(maxval) + " (only 255)");
  }
  std::string pixels(static_cast<std::size_t>(width * height), '\0');
  in.read(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw Error(ErrorCode::IoFailure, path.string() + " is truncated");
  }
  Image image(height, width);
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      image(r, c) = static_cast<unsigned char>(pixels[static_cast<std::size_t>(r * width + c)]);
    }
  }
  return image;
}

void save_pgm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::string pixels;
  pixels.reserve(static_cast<std::size_t>(image.size()));
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(std::round(image(r, c)), 0.0, 255.0);
      pixels.push_back(static_cast<char>(static_cast<unsigned char>(v)));
    }
  }
  out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Patches extract_patches(const Image& image, Eigen::Index patch_size, Eigen::Index stride) {
  if (patch_size < 1 || stride < 1) {
    throw Error(ErrorCode::InvalidArgument, "patch size and stride must be positive");
  }
  if (image.rows() != image.cols()) {
    throw Error(ErrorCode::NonSquareImage, std::to_string(image.rows()) + "x" +
                                               std::to_string(image.cols()) +
                                               " image (only square images are supported)");
  }
  const Eigen::Index q = image.rows();
  if (q < patch_size) {
    throw Error(ErrorCode::ImageTooSmall,
                "image side " + std::to_string(q) + " < patch size " + std::to_string(patch_size));
  }
  Patches out;
  PatchGrid& grid = out.grid;
  grid.patch_size = patch_size;
  grid.stride = stride;
  grid.image_rows = q;
  grid.image_cols = q;
  for (Eigen::Index o = 0; o + patch_size <= q; o += stride) {
    grid.origin_rows.push_back(o);
    grid.origin_cols.push_back(o);
  }

  out.signals.resize(patch_size * patch_size, grid.num_patches());
  Eigen::Index p = 0;
  for (const auto r : grid.origin_rows) {
    for (const auto c : grid.origin_cols) {
      const Eigen::MatrixXd block = image.block(r, c, patch_size, patch_size);
      out.signals.col(p++) = Eigen::Map<const Eigen::VectorXd>(block.data(), block.size());
    }
  }
  return out;
}

Eigen::MatrixXd coverage_counts(const PatchGrid& grid) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(grid.image_rows, grid.image_cols);
  for (const auto r : grid.origin_rows) {
    for (const auto c : grid.origin_cols) {
      counts.block(r, c, grid.patch_size, grid.patch_size).array() += 1.0;
    }
  }
  return counts;
}

Image reassemble_image(const Eigen::MatrixXd& patches, const PatchGrid& grid, bool clamp) {
  const Eigen::Index size = grid.patch_size;
  if (patches.rows() != size * size || patches.cols() != grid.num_patches()) {
    throw Error(ErrorCode::DimensionMismatch,
                "patch matrix is " + std::to_string(patches.rows()) + "x" +
                    std::to_string(patches.cols()) + " but the grid has " +
                    std::to_string(grid.num_patches()) + " patches of " +
                    std::to_string(size * size) + " pixels");
  }
  Image sum = Image::Zero(grid.image_rows, grid.image_cols);
  // Fixed summation order (grid order) keeps the result bit-reproducible.
  Eigen::Index p = 0;
  for (const auto r : grid.origin_rows) {
    for (const auto c : grid.origin_cols) {
      sum.block(r, c, size, size) +=
          Eigen::Map<const Eigen::MatrixXd>(patches.col(p).data(), size, size);
      ++p;
    }
  }
  const Eigen::MatrixXd counts = coverage_counts(grid);
  if ((counts.array() == 0.0).any()) {
    throw Error(ErrorCode::CoverageGap, "some pixels are covered by no patch");
  }
  Image image = sum.array() / counts.array();
  if (clamp) image = image.cwiseMax(0.0).cwiseMin(255.0);
  return image;
}

Eigen::RowVectorXd remove_column_means(Eigen::MatrixXd& signals) {
  const Eigen::RowVectorXd means = signals.colwise().mean();
  signals.rowwise() -= means;
  return means;
}

Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  Image noisy = image;
  for (Eigen::Index r = 0; r < noisy.rows(); ++r) {
    for (Eigen::Index c = 0; c < noisy.cols(); ++c) noisy(r, c) += sigma * rng.normal();
  }
  return noisy;
}

}  // namespace sbdl
