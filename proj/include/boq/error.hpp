#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace boq {

/// Base of every error the toolkit raises. Callers that only need to report
/// a failure can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input does not have the expected columns or shape.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A single input row violates a record invariant.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Settings are inconsistent or leave nothing to work on.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition (shape mismatch, bad argument).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The requested quantity has no defined value for this input.
class UndefinedResultError : public Error {
 public:
  using Error::Error;
};

/// A text file could not be parsed; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A file parsed but its contents have the wrong layout or dimensions.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Optimisation produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(int epoch, const std::string& what)
      : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace boq
