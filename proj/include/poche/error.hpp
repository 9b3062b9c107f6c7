#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace poche {

enum class ErrorCode {
  EmptyModel,
  ParseError,
  DuplicateId,
  LayerRefError,
  HeaderError,
  ConflictError,
  IoError,
  NoSection,
  UnknownElement,
  BehindCamera,
  DegenerateReference,
  InvalidPose,
  DegenerateTest,
  InvalidDuration,
  DegenerateBaseline,
  AllTies,
  PairSetError,
  RangeError,
  ArityError,
  EmptyCohort,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library is reported through this type.
/// `line()` is nonzero for parse failures that can be pinned to an input line.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

private:
  ErrorCode code_;
  std::size_t line_;
};

} // namespace poche
