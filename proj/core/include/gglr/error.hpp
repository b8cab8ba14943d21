#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gglr {

/// Error classes raised by the library. Each maps to a stable name (used in
/// reports) and a stable process exit code (used by the CLI).
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kNonConvergence,
  kBreakdownNegativeCurvature,
  kDimensionTooSmall,
  kRankDeficient,
  kNoCoordinates,
  kDegenerateCoordinates,
  kNodeNotComputable,
  kNotOneDimensional,
  kSingularPhi,
  kNotAGrid,
  kDegenerateSpectrum,
  kNotConnected,
  kEigensolverFailure,
  kParseError,
  kDuplicateEdge,
  kSelfLoop,
  kDegeneratePoints,
  kLengthMismatch,
  kNotManifold,
  kIoError,
};

std::string_view error_name(ErrorCode code);

/// Process exit code for `code`; 0 is reserved for success and 1 for
/// unclassified failures.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message,
        std::int64_t index = -1);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }
  const std::string& module() const noexcept { return module_; }
  // The message without the name and module prefix of what().
  const std::string& message() const noexcept { return message_; }
  // Offending node / iteration index when the error concerns one, else -1.
  std::int64_t index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string message_;
  std::int64_t index_;
};

}  // namespace gglr
