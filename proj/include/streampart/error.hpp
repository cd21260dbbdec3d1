#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace streampart {

/// Broad failure class; the CLI maps it to its exit code.
enum class ErrorCategory {
  invalid_input = 1,  // malformed or inconsistent user input
  model = 2,          // well-formed input whose model is infeasible or unbounded
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& message)
      : Error(ErrorCategory::invalid_input, message) {}
};

class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message)
      : Error(ErrorCategory::model, message) {}
};

/// Problem/assignment file that is not valid JSON or does not match the schema.
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, std::size_t line = 0,
             std::size_t column = 0)
      : InputError(line > 0 ? "line " + std::to_string(line) + ", column " +
                                  std::to_string(column) + ": " + message
                            : message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A problem that failed validation; the message lists every error diagnostic.
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

/// The rate-balance equations admit only the zero solution.
class InconsistentRates : public InputError {
 public:
  InconsistentRates(const std::string& message, std::string witness_channel)
      : InputError(message), witness_channel_(std::move(witness_channel)) {}

  const std::string& witness_channel() const noexcept {
    return witness_channel_;
  }

 private:
  std::string witness_channel_;
};

/// Integer overflow while scaling repetition counts or resource sums.
class ArithmeticOverflow : public InputError {
 public:
  using InputError::InputError;
};

class AssignmentError : public InputError {
 public:
  enum class Kind { incomplete, unknown_process, pin_violation, rmax_exceeded };

  AssignmentError(Kind kind, const std::string& message)
      : InputError(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class SearchSpaceTooLarge : public InputError {
 public:
  SearchSpaceTooLarge(long double size, std::uint64_t limit)
      : InputError("search space too large: " + format_size(size) +
                   " assignments exceed the limit of " +
                   std::to_string(limit)),
        size_(size) {}

  long double size() const noexcept { return size_; }

 private:
  static std::string format_size(long double size);
  long double size_;
};

class CalibrationError : public InputError {
 public:
  using InputError::InputError;
};

class SimulationConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// No assignment satisfies the FPGA resource constraints.
class Infeasible : public ModelError {
 public:
  using ModelError::ModelError;
};

/// No finite constraint caps the iteration rate.
class UnboundedThroughput : public ModelError {
 public:
  UnboundedThroughput()
      : ModelError("unbounded throughput: no finite constraint") {}
};

/// The simulation stopped making progress before the end of the run.
class Deadlock : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace streampart
