#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace sbdl {

/// Grayscale image, row-major pixel semantics: image(row, col), values in [0, 255].
using Image = Eigen::MatrixXd;

Image load_pgm(const std::filesystem::path& path);

/// Binary P5 with maxval 255. Pixels are rounded half away from zero and
/// clamped to [0, 255].
void save_pgm(const Image& image, const std::filesystem::path& path);

struct PatchGrid {
  Eigen::Index patch_size = 8;
  Eigen::Index stride = 1;
  std::vector<Eigen::Index> origin_rows;
  std::vector<Eigen::Index> origin_cols;
  Eigen::Index image_rows = 0;
  Eigen::Index image_cols = 0;

  Eigen::Index num_patches() const {
    return static_cast<Eigen::Index>(origin_rows.size() * origin_cols.size());
  }
};

struct Patches {
  Eigen::MatrixXd signals;  // patch_size^2 x P
  PatchGrid grid;
};

/// Patches with top-left corners at (stride*i, stride*j),
/// i, j = 0..floor((Q - patch)/stride). Each column is a column-major
/// vectorized patch; columns are ordered row-major over (i, j).
Patches extract_patches(const Image& image, Eigen::Index patch_size, Eigen::Index stride);

/// Each pixel becomes the mean of its value over every patch covering it.
/// Throws CoverageGap if some pixel is covered by no patch.
Image reassemble_image(const Eigen::MatrixXd& patches, const PatchGrid& grid, bool clamp = true);

/// Number of grid patches covering each pixel.
Eigen::MatrixXd coverage_counts(const PatchGrid& grid);

/// Subtracts each column's mean in place and returns the means.
Eigen::RowVectorXd remove_column_means(Eigen::MatrixXd& signals);

/// image + N(0, sigma^2) per pixel, no clamping.
Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed);

}  // namespace sbdl
