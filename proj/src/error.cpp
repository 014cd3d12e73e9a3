#include "ksf/error.hpp"

namespace ksf {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::file_not_found: return "file-not-found";
    case ErrorCode::malformed_input: return "malformed-input";
    case ErrorCode::cadence_violation: return "cadence-violation";
    case ErrorCode::unsupported_format: return "unsupported-format";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::protocol_error: return "protocol-error";
    case ErrorCode::session_fault: return "session-fault";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(message), code_(code), line_(line) {}

}  // namespace ksf
