#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace besim {

enum class ErrorKind {
  configuration,
  input,
  numerical_state,
  dimension,
  step_rejected,
  diverged_iteration,
  serrin_range,
  format,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Base of every exception thrown by the library. The kind is stable and
/// machine readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class StepRejected : public Error {
 public:
  StepRejected(const std::string& message, double suggested_dt);
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

}  // namespace besim
