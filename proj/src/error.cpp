#include "besim/error.hpp"

namespace besim {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::input: return "input";
    case ErrorKind::numerical_state: return "numerical_state";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::step_rejected: return "step_rejected";
    case ErrorKind::diverged_iteration: return "diverged_iteration";
    case ErrorKind::serrin_range: return "serrin_range";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

StepRejected::StepRejected(const std::string& message, double suggested_dt)
    : Error(ErrorKind::step_rejected, message), suggested_dt_(suggested_dt) {}

}  // namespace besim
