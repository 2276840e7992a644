#include "linr/error.hpp"

namespace linr {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kCapacityExhausted: return "capacity_exhausted";
    case ErrorCode::kAllocationRefused: return "allocation_refused";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kCorruption: return "corruption";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUndefinedDirection: return "undefined_direction";
  }
  return "unknown";
}

}  // namespace linr
