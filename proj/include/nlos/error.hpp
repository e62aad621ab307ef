#pragma once

#include <stdexcept>
#include <string>

namespace nlos {

enum class ErrorKind {
  Geometry,
  MissingParameter,
  Domain,
  Shape,
  Truncation,
  Configuration,
  Calibration,
  Format,
  Integrity,
  Budget,
  Io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so the CLI can map it
/// onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// CLI exit code: 2 validation, 3 integrity/format, 4 budget.
int exit_code(ErrorKind kind);

}  // namespace nlos
