#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ksf {

enum class ErrorCode {
  invalid_argument,
  file_not_found,
  malformed_input,
  cadence_violation,
  unsupported_format,
  io_error,
  protocol_error,
  session_fault,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. `line` is the 1-based input line
/// for parse errors and 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace ksf
