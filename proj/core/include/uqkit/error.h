#ifndef UQKIT_ERROR_H_
#define UQKIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace uqkit {

// Typed failure categories. The enumerator name is what the CLI prints on
// stderr, so renaming one is a breaking change for scripts.
enum class ErrorCode {
  kBadMagic,
  kUnsupportedDescr,
  kHeaderMismatch,
  kFortranOrder,
  kMalformedHeader,
  kShapeError,
  kRangeError,
  kRowSumError,
  kIndexError,
  kBinaryError,
  kTaskMismatch,
  kDomainError,
  kNoPositives,
  kDegenerateClass,
  kAllClassesSkipped,
  kEmptyRetained,
  kEmptyInput,
  kNonFinite,
  kDimMismatch,
  kStrategyMismatch,
  kConfigError,
  kIoError,
};

std::string_view ErrorName(ErrorCode code);

// Numeric failures map to exit code 3, everything else is an input problem.
bool IsNumericFailure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }
  std::string_view name() const { return ErrorName(code_); }

 private:
  ErrorCode code_;
};

}  // namespace uqkit

#endif  // UQKIT_ERROR_H_
