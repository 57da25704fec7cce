#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfem {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kNonConvergence,
  kOutsideTube,
  kDegenerateTriangle,
  kSingularShapeOperator,
  kNonManifold,
  kInconsistentOrientation,
  kGenerationMismatch,
  kMetadataMissing,
  kStrategyMismatch,
  kDepthLimit,
  kSolverDivergence,
  kTauUnderflow,
  kDofCapExceeded,
  kSpatialStagnation,
  kInitialDataTooCoarse,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// C layer can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sfem
