#include "uqkit/error.h"

namespace uqkit {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedDescr: return "UnsupportedDescr";
    case ErrorCode::kHeaderMismatch: return "HeaderMismatch";
    case ErrorCode::kFortranOrder: return "FortranOrder";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kRangeError: return "RangeError";
    case ErrorCode::kRowSumError: return "RowSumError";
    case ErrorCode::kIndexError: return "IndexError";
    case ErrorCode::kBinaryError: return "BinaryError";
    case ErrorCode::kTaskMismatch: return "TaskMismatch";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kDegenerateClass: return "DegenerateClass";
    case ErrorCode::kAllClassesSkipped: return "AllClassesSkipped";
    case ErrorCode::kEmptyRetained: return "EmptyRetained";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kStrategyMismatch: return "StrategyMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "UnknownError";
}

bool IsNumericFailure(ErrorCode code) { return code == ErrorCode::kNonFinite; }

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorName(code)) + ": " + message),
      code_(code) {}

}  // namespace uqkit
