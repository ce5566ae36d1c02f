#include "risklens/error.hpp"

namespace risklens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kParse:
      return "parse_error";
    case ErrorCode::kDimensionMismatch:
      return "dimension_mismatch";
    case ErrorCode::kNonConsecutiveStep:
      return "non_consecutive_step";
    case ErrorCode::kRecordAfterTerminal:
      return "record_after_terminal";
    case ErrorCode::kEmptyInput:
      return "empty_input";
    case ErrorCode::kVersionMismatch:
      return "version_mismatch";
    case ErrorCode::kCorruptFile:
      return "corrupt_file";
    case ErrorCode::kIo:
      return "io_error";
  }
  return "unknown";
}

namespace {

std::string with_line(const std::string& message, std::size_t line) {
  if (line == 0) return message;
  return "line " + std::to_string(line) + ": " + message;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(with_line(message, line)), code_(code), line_(line) {}

}  // namespace risklens
