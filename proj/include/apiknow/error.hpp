#pragma once

#include <stdexcept>
#include <string>

namespace apiknow {

enum class ErrorKind {
  persistence,
  parse,
  invariant,
  framework_mismatch,
  duplicate_api,
  generation,
  usage,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure surfaced by the library. The kind lets the CLI map
/// failures to distinct diagnostics and exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace apiknow
