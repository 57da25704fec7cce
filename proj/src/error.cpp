#include "sfem/error.hpp"

namespace sfem {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kOutsideTube: return "OutsideTube";
    case ErrorCode::kDegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::kSingularShapeOperator: return "SingularShapeOperator";
    case ErrorCode::kNonManifold: return "NonManifold";
    case ErrorCode::kInconsistentOrientation: return "InconsistentOrientation";
    case ErrorCode::kGenerationMismatch: return "GenerationMismatch";
    case ErrorCode::kMetadataMissing: return "MetadataMissing";
    case ErrorCode::kStrategyMismatch: return "StrategyMismatch";
    case ErrorCode::kDepthLimit: return "DepthLimit";
    case ErrorCode::kSolverDivergence: return "SolverDivergence";
    case ErrorCode::kTauUnderflow: return "TauUnderflow";
    case ErrorCode::kDofCapExceeded: return "DofCapExceeded";
    case ErrorCode::kSpatialStagnation: return "SpatialStagnation";
    case ErrorCode::kInitialDataTooCoarse: return "InitialDataTooCoarse";
  }
  return "Unknown";
}

}  // namespace sfem
