#pragma once

#include <stdexcept>
#include <string>

namespace ebstates {

enum class ErrorCode {
  invalid_argument = 1,
  defective_point = 2,
  singular = 3,
  no_convergence = 4,
  resonance = 5,
  ambiguous = 6,
  io = 7,
};

/// Exception type thrown by every routine in the library. The code is what
/// the C API hands back; the message is surfaced verbatim by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace ebstates
