#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpcircle {

// Failure classes. The CLI maps invalid_input/parse_error to exit code 2 and
// infeasible/degenerate to exit code 3.
enum class ErrorCode {
  invalid_input,
  parse_error,
  infeasible,
  degenerate,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::degenerate: return "degenerate";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failures carry the 1-based line number of the offending input.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::parse_error,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vpcircle
