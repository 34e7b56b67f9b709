#pragma once

#include <stdexcept>
#include <string>

namespace crmsfem {

/// Base of every error thrown by the library. `code()` is a short
/// machine-readable token used by the CLI error line.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  SolverError(const std::string& what, double residual)
      : Error("solver-failure", what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class ConfigError : public Error {
public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : Error("config", what), line_(line), field_(std::move(field)) {}

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

private:
  int line_;
  std::string field_;
};

}  // namespace crmsfem
