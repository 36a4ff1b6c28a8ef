#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rdict {

/// Failure categories shared by every module. The numeric values are part of
/// the C ABI (see rdict.h) and must not be reordered.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kInvalidState = 3,
  kCorruptCheckpoint = 4,
  kParse = 5,
  kSchema = 6,
  kEmptyDataset = 7,
  kNumeric = 8,
  kDegenerateVector = 9,
  kMissingGold = 10,
  kConfig = 11,
  kIo = 12,
  kBridge = 13,
  kInternal = 14,
};

std::string_view error_code_name(ErrorCode code) noexcept;

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

}  // namespace rdict
