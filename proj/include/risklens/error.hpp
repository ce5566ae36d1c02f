#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace risklens {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kDimensionMismatch,
  kNonConsecutiveStep,
  kRecordAfterTerminal,
  kEmptyInput,
  kVersionMismatch,
  kCorruptFile,
  kIo,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type. `line()` is the
// 1-based input line for parse-time errors and 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace risklens
