#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tag {

enum class ErrorCode {
  DanglingReference,
  CycleDetected,
  DuplicateId,
  UnknownId,
  UnknownType,
  InvalidSpan,
  InvalidOperation,
  MalformedLine,
  OffsetOutOfBounds,
  TextMismatch,
  ColumnCountMismatch,
  NonNumericHead,
  HeadOutOfRange,
  XmlMalformed,
  UnknownRefId,
  DuplicateTypeName,
  IndentationError,
  InvalidColor,
  NotRepresentable,
  TokenTooWide,
  RangeOutOfBounds,
  UnknownRef,
  InvalidArgIndex,
  NothingToUndo,
  BaseMismatch,
  ReplayConflict,
  BadRequest,
  NotFound,
};

/// Machine-readable name, e.g. CYCLE_DETECTED.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace tag
