#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgbench {

enum class ErrorKind {
  InvalidArgument,
  ShapeMismatch,
  NonFinite,
  Io,
  Format,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Structured fault raised by every module. The kind lets callers tell
/// recoverable data problems (NonFinite, Format) from programming errors.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace sgbench
