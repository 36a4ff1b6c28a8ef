#include "rdict/error.hpp"

namespace rdict {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kInvalidState: return "invalid-state";
    case ErrorCode::kCorruptCheckpoint: return "corrupt-checkpoint";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kSchema: return "schema-error";
    case ErrorCode::kEmptyDataset: return "empty-dataset";
    case ErrorCode::kNumeric: return "numeric-error";
    case ErrorCode::kDegenerateVector: return "degenerate-vector";
    case ErrorCode::kMissingGold: return "missing-gold";
    case ErrorCode::kConfig: return "config-error";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kBridge: return "bridge-error";
    case ErrorCode::kInternal: return "internal-error";
  }
  return "unknown";
}

}  // namespace rdict
