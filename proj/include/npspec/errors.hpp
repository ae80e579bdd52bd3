#pragma once

#include <stdexcept>
#include <string>

namespace npspec {

// Process exit codes used by the command-line tool. Every error class maps to
// exactly one code.
enum class ExitCode : int {
  ok = 0,
  usage = 2,
  config = 3,
  not_positive_definite = 4,
  numerical = 5,
  geometry = 6,
  io = 7,
};

class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what, ExitCode code)
      : std::runtime_error(module + ": " + what), module_(std::move(module)), code_(code) {}

  const std::string& module() const noexcept { return module_; }
  ExitCode exit_code() const noexcept { return code_; }

 private:
  std::string module_;
  ExitCode code_;
};

/// Invalid configuration, resolution, window or basis. `pointer` is a JSON
/// pointer into the offending config document when one applies.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string pointer = {},
                       std::string module = "config")
      : Error(std::move(module), pointer.empty() ? what : pointer + ": " + what,
              ExitCode::config),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::string module = "numerics")
      : Error(std::move(module), what, ExitCode::numerical) {}
};

// Gauss-Bonnet did not land near an integer: the grid is too coarse for the
// surface.
class TopologyWarning : public NumericalError {
 public:
  explicit TopologyWarning(const std::string& what)
      : NumericalError(what, "curvature-functionals") {}
};

class DegenerateChart : public Error {
 public:
  explicit DegenerateChart(const std::string& what)
      : Error("surface-geometry", what, ExitCode::geometry) {}
};

class SingularInversion : public Error {
 public:
  explicit SingularInversion(const std::string& what)
      : Error("surface-geometry", what, ExitCode::geometry) {}
};

class GridError : public Error {
 public:
  explicit GridError(const std::string& what)
      : Error("potential-assembly", what, ExitCode::geometry) {}
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(const std::string& what)
      : Error("potential-assembly", what, ExitCode::not_positive_definite) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, std::string module = "spectral-analysis")
      : Error(std::move(module), what, ExitCode::numerical) {}
};

// plasmon_map evaluated at the constant-eigenfunction eigenvalue 1/2.
class PoleError : public DomainError {
 public:
  explicit PoleError(const std::string& what) : DomainError(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("cli-reporting", what, ExitCode::io) {}
};

}  // namespace npspec
