#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rankshape {

enum class ErrorCode {
  // input errors (CLI exit code 1)
  kInvalidArgument,
  kRange,
  kDimensionMismatch,
  kTrajectoryTooShort,
  kGroupTooSmall,
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedPayload,
  kNonFiniteValue,
  kParse,
  kUnknownConfigKey,
  kIo,
  // numerical / degenerate errors (CLI exit code 2)
  kDegenerateSpectrum,
  kZeroVariance,
  kZeroVarianceLookahead,
  kNormalizationDegenerate,
  kDegenerateLabels,
  kDegenerateFeature,
  kSeparableData,
};

enum class ErrorClass { kInput, kNumerical };

/// Stable snake_case identifier, e.g. "degenerate_spectrum".
std::string_view error_code_id(ErrorCode code);

/// Human-readable name, e.g. "degenerate spectrum".
std::string_view error_code_name(ErrorCode code);

ErrorClass error_class(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace rankshape
