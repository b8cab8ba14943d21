#include "gglr/error.hpp"

namespace gglr {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kBreakdownNegativeCurvature: return "BreakdownNegativeCurvature";
    case ErrorCode::kDimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNoCoordinates: return "NoCoordinates";
    case ErrorCode::kDegenerateCoordinates: return "DegenerateCoordinates";
    case ErrorCode::kNodeNotComputable: return "NodeNotComputable";
    case ErrorCode::kNotOneDimensional: return "NotOneDimensional";
    case ErrorCode::kSingularPhi: return "SingularPhi";
    case ErrorCode::kNotAGrid: return "NotAGrid";
    case ErrorCode::kDegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::kNotConnected: return "NotConnected";
    case ErrorCode::kEigensolverFailure: return "EigensolverFailure";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kDegeneratePoints: return "DegeneratePoints";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNotManifold: return "NotManifold";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) { return 10 + static_cast<int>(code); }

namespace {

std::string compose(ErrorCode code, const std::string& module,
                    const std::string& message) {
  std::string out(error_name(code));
  out += " [";
  out += module;
  out += "]: ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string module, const std::string& message,
             std::int64_t index)
    : std::runtime_error(compose(code, module, message)),
      code_(code),
      module_(std::move(module)),
      message_(message),
      index_(index) {}

}  // namespace gglr
