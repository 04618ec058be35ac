#pragma once

#include <sstream>
#include <string>

namespace objf {

// Verbosity is read once from the OBJF_LOG environment variable
// (error, warn, info, debug); default is warn.
enum class LogLevel : int {
  Error = 0,
  Warn = 1,
  Info = 2,
  Debug = 3,
};

LogLevel log_level();
bool log_enabled(LogLevel level);
void log_message(LogLevel level, const std::string& message);

namespace detail {

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream out;
  (out << ... << args);
  return out.str();
}

}  // namespace detail

template <typename... Args>
void log_error(Args&&... args) {
  if (log_enabled(LogLevel::Error)) log_message(LogLevel::Error, detail::concat(args...));
}

template <typename... Args>
void log_warn(Args&&... args) {
  if (log_enabled(LogLevel::Warn)) log_message(LogLevel::Warn, detail::concat(args...));
}

template <typename... Args>
void log_info(Args&&... args) {
  if (log_enabled(LogLevel::Info)) log_message(LogLevel::Info, detail::concat(args...));
}

template <typename... Args>
void log_debug(Args&&... args) {
  if (log_enabled(LogLevel::Debug)) log_message(LogLevel::Debug, detail::concat(args...));
}

}  // namespace objf
