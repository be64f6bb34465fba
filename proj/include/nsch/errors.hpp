#pragma once

#include <stdexcept>
#include <string>

namespace nsch {

// Failure classes map one-to-one onto CLI exit codes; see tools/nsch_cli.cpp.

struct LayoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  SolverError(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual = 0.0;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nsch
