#pragma once

#include <stdexcept>
#include <string>

namespace netflow {

/// Broad failure classes. The C API and the CLI map these onto status and
/// exit codes.
enum class ErrorKind {
  InvalidArgument,
  Format,
  Config,
  Numerical,
  Io,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::InvalidArgument, what) {}
};

class FormatError : public Error {
public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::Format, what) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Integration or training failure. `reason` distinguishes the solver
/// failure modes so callers can report them precisely.
class NumericalError : public Error {
public:
  enum class Reason { Stiffness, Budget, Divergence, Training };

  NumericalError(Reason reason, const std::string& what)
      : Error(ErrorKind::Numerical, what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

private:
  Reason reason_;
};

}  // namespace netflow
