#include "rankshape/error.hpp"

namespace rankshape {

namespace {

struct CodeInfo {
  std::string_view id;
  std::string_view name;
  ErrorClass cls;
};

CodeInfo info(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return {"invalid_argument", "invalid argument", ErrorClass::kInput};
    case ErrorCode::kRange:
      return {"range", "range error", ErrorClass::kInput};
    case ErrorCode::kDimensionMismatch:
      return {"dimension_mismatch", "dimension mismatch", ErrorClass::kInput};
    case ErrorCode::kTrajectoryTooShort:
      return {"trajectory_too_short", "trajectory too short", ErrorClass::kInput};
    case ErrorCode::kGroupTooSmall:
      return {"group_too_small", "group too small", ErrorClass::kInput};
    case ErrorCode::kBadMagic:
      return {"bad_magic", "bad magic", ErrorClass::kInput};
    case ErrorCode::kUnsupportedVersion:
      return {"unsupported_version", "unsupported version", ErrorClass::kInput};
    case ErrorCode::kTruncatedPayload:
      return {"truncated_payload", "truncated payload", ErrorClass::kInput};
    case ErrorCode::kNonFiniteValue:
      return {"non_finite_value", "non-finite value", ErrorClass::kInput};
    case ErrorCode::kParse:
      return {"parse", "parse error", ErrorClass::kInput};
    case ErrorCode::kUnknownConfigKey:
      return {"unknown_config_key", "unknown config key", ErrorClass::kInput};
    case ErrorCode::kIo:
      return {"io", "i/o error", ErrorClass::kInput};
    case ErrorCode::kDegenerateSpectrum:
      return {"degenerate_spectrum", "degenerate spectrum", ErrorClass::kNumerical};
    case ErrorCode::kZeroVariance:
      return {"zero_variance", "zero-variance trajectory", ErrorClass::kNumerical};
    case ErrorCode::kZeroVarianceLookahead:
      return {"zero_variance_lookahead", "zero-variance look-ahead",
              ErrorClass::kNumerical};
    case ErrorCode::kNormalizationDegenerate:
      return {"normalization_degenerate", "normalization degenerate",
              ErrorClass::kNumerical};
    case ErrorCode::kDegenerateLabels:
      return {"degenerate_labels", "degenerate labels", ErrorClass::kNumerical};
    case ErrorCode::kDegenerateFeature:
      return {"degenerate_feature", "degenerate feature", ErrorClass::kNumerical};
    case ErrorCode::kSeparableData:
      return {"separable_data", "separable data", ErrorClass::kNumerical};
  }
  return {"unknown", "unknown error", ErrorClass::kInput};
}

}  // namespace

std::string_view error_code_id(ErrorCode code) { return info(code).id; }
std::string_view error_code_name(ErrorCode code) { return info(code).name; }
ErrorClass error_class(ErrorCode code) { return info(code).cls; }

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_code_name(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(detail) {}

}  // namespace rankshape
