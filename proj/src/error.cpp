#include "reactor/error.hpp"

namespace reactor {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnboundedInterval: return "UnboundedInterval";
    case ErrorCode::UnsortedHistory: return "UnsortedHistory";
    case ErrorCode::InvalidExpression: return "InvalidExpression";
    case ErrorCode::OutOfOrderEvent: return "OutOfOrderEvent";
    case ErrorCode::StaleDetection: return "StaleDetection";
    case ErrorCode::NoWindow: return "NoWindow";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateRuleId: return "DuplicateRuleId";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::TemplateError: return "TemplateError";
    case ErrorCode::ChainLimitExceeded: return "ChainLimitExceeded";
    case ErrorCode::DuplicateEffect: return "DuplicateEffect";
    case ErrorCode::TraceParseError: return "TraceParseError";
    case ErrorCode::OutOfOrderTrace: return "OutOfOrderTrace";
    case ErrorCode::ReservedType: return "ReservedType";
    case ErrorCode::InvalidPeriod: return "InvalidPeriod";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& detail,
                           std::size_t line, std::size_t column) {
  std::string msg(to_string(code));
  if (line != 0) {
    msg += " at line " + std::to_string(line);
    if (column != 0) msg += ", column " + std::to_string(column);
  }
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& detail, std::size_t line,
             std::size_t column)
    : std::runtime_error(format_message(code, detail, line, column)),
      code_(code),
      detail_(detail),
      line_(line),
      column_(column) {}

}  // namespace reactor
