#include "ccreid/error.hpp"

namespace ccreid {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::NotScalarRoot: return "NotScalarRoot";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyTemplateBank: return "EmptyTemplateBank";
    case ErrorCode::SyntheticInput: return "SyntheticInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidEps: return "InvalidEps";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::UnknownCluster: return "UnknownCluster";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::WrongBatchSize: return "WrongBatchSize";
    case ErrorCode::TooFewClusters: return "TooFewClusters";
    case ErrorCode::InvalidTemperature: return "InvalidTemperature";
    case ErrorCode::MalformedGroup: return "MalformedGroup";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoValidMatch: return "NoValidMatch";
  }
  return "Unknown";
}

}  // namespace ccreid
