#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbdl {

enum class ErrorCode {
  NonPositiveHyperparameter,
  BurnInExceedsIterations,
  EmptyTrainingSet,
  NonFiniteData,
  SingularPrecision,
  NegativeResidual,
  NonFinite,
  EmptyTrace,
  TailLargerThanTrace,
  DimensionMismatch,
  ShapeMismatch,
  ZeroVector,
  ZeroSignal,
  InvalidArgument,
  MalformedHeader,
  UnsupportedMaxval,
  IoFailure,
  ImageTooSmall,
  NonSquareImage,
  CoverageGap,
  ConfigParseError,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported through this exception; `code()` is the
/// stable, matchable part and `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sbdl
