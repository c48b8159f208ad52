#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace reactor {

enum class ErrorCode {
  UnboundedInterval,
  UnsortedHistory,
  InvalidExpression,
  OutOfOrderEvent,
  StaleDetection,
  NoWindow,
  SyntaxError,
  DuplicateRuleId,
  UnboundVariable,
  MissingField,
  TemplateError,
  ChainLimitExceeded,
  DuplicateEffect,
  TraceParseError,
  OutOfOrderTrace,
  ReservedType,
  InvalidPeriod,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library. `line`/`column` are 1-based and zero
// when the error has no source position.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail, std::size_t line = 0,
        std::size_t column = 0);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace reactor
