#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

namespace sbdl {

// Text matrix format: a "rows cols" line, then one line per row of
// space-separated values printed with 17 significant digits.

std::string format_matrix(const Eigen::MatrixXd& m);
void write_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path);
Eigen::MatrixXd parse_matrix(std::istream& in);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// %.17g rendering used for every number this library writes to a file.
std::string format_double(double value);

}  // namespace sbdl
