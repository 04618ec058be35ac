#pragma once

#include <stdexcept>
#include <string>

namespace objf {

// Broad failure classes; the CLI maps Numerical to its own exit code and
// everything else that is data-dependent to a validation exit code.
enum class ErrorKind {
  InvalidArgument,
  Parse,
  Io,
  Validation,
  Numerical,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string module, const std::string& message);

  ErrorKind kind() const { return kind_; }
  const std::string& module() const { return module_; }

private:
  ErrorKind kind_;
  std::string module_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& module, const std::string& message);

inline void require(bool cond, ErrorKind kind, const std::string& module, const std::string& message) {
  if (!cond) raise(kind, module, message);
}

}  // namespace objf
