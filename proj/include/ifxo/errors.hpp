#pragma once

#include <stdexcept>
#include <string>

namespace ifxo {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: missing file, malformed CSV, parameter out of range.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

// Dataset-level problems (unparsable cells, missing columns).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// The model admits no feasible point for the requested (k, m, alpha).
class InfeasibleModel : public Error {
 public:
  explicit InfeasibleModel(const std::string& msg) : Error(msg) {}
};

// A guaranteed internal property failed at runtime. Always a bug.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& msg) : Error(msg) {}
};

// Solver backend failure (missing interpreter, crash, bad output).
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& msg) : Error(msg) {}
};

}  // namespace ifxo
