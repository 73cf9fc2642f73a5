#pragma once

#include <stdexcept>
#include <string>

namespace paintpot {

// Error kinds map one-to-one onto the CLI exit codes.
enum class ErrorKind { config = 2, numeric = 3, io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Input outside the domain an operation is defined on (angle ranges, model ranges).
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Invalid sensor/filter/experiment configuration.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Malformed CSV or JSON input. Carries the offending row when known (1-based, header is row 1).
struct ParseError : Error {
  ParseError(const std::string& what, long row = -1)
      : Error(ErrorKind::config, row >= 0 ? "row " + std::to_string(row) + ": " + what : what),
        row(row) {}
  long row;
};

/// Least-squares fit, inversion or filter numerics failed.
struct FitError : Error {
  explicit FitError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

/// Non-positive innovation covariance or similar numerical breakdown.
struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

/// Filter could not be initialized from the first reading.
struct InitError : Error {
  explicit InitError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace paintpot
