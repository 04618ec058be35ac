#include "objf/common/error.hpp"

namespace objf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Numerical: return "numerical";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error("[" + module + "] " + message),
      kind_(kind),
      module_(std::move(module)) {}

void raise(ErrorKind kind, const std::string& module, const std::string& message) {
  throw Error(kind, module, message);
}

}  // namespace objf
