#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linr {

enum class ErrorCode {
  kInvalidArgument,
  kShape,
  kCapacityExhausted,
  kAllocationRefused,
  kUnsupported,
  kParse,
  kSchema,
  kCorruption,
  kIo,
  kUndefinedDirection,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the engine carries a machine-readable code so the
/// service layer can map it onto HTTP statuses and the CLI onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace linr
