#include "sbdl/error.hpp"

namespace sbdl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveHyperparameter: return "NonPositiveHyperparameter";
    case ErrorCode::BurnInExceedsIterations: return "BurnInExceedsIterations";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::NonFiniteData: return "NonFiniteData";
    case ErrorCode::SingularPrecision: return "SingularPrecision";
    case ErrorCode::NegativeResidual: return "NegativeResidual";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::TailLargerThanTrace: return "TailLargerThanTrace";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::NonSquareImage: return "NonSquareImage";
    case ErrorCode::CoverageGap: return "CoverageGap";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
  }
  return "Unknown";
}

}  // namespace sbdl
