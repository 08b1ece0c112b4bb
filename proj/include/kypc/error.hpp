#pragma once

#include <stdexcept>
#include <string>

namespace kypc {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorCode {
  invalid_argument = 2,
  precondition = 3,
  singular_system = 4,
  pole_on_grid = 5,
  not_converged = 6,
  schema = 10,
  dimension_mismatch = 11,
  not_hermitian = 12,
  r_not_positive_definite = 13,
  io = 14,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kypc
