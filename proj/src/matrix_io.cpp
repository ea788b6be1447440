#include "sbdl/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sbdl/error.hpp"

namespace sbdl {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out.push_back(' ');
      out += format_double(m(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

void write_matrix(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << format_matrix(m);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Eigen::MatrixXd parse_matrix(std::istream& in) {
  long rows = -1;
  long cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw Error(ErrorCode::MalformedHeader, "matrix header must be 'rows cols'");
  }
  Eigen::MatrixXd m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (!(in >> m(r, c))) {
        throw Error(ErrorCode::IoFailure, "matrix data ends early at row " + std::to_string(r) +
                                              ", column " + std::to_string(c));
      }
    }
  }
  return m;
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return parse_matrix(in);
}

}  // namespace sbdl
