#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thetanorm {

/// Base of every error raised by the library. `code()` is a short stable
/// identifier used as the machine-parsable prefix of CLI error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& msg) : Error("invalid-input", msg) {}
};

class InvalidParams : public Error {
 public:
  explicit InvalidParams(const std::string& msg) : Error("invalid-params", msg) {}
};

class InfeasibleBudget : public Error {
 public:
  explicit InfeasibleBudget(const std::string& msg)
      : Error("infeasible-budget", msg) {}
};

class TestScaleExceeded : public Error {
 public:
  explicit TestScaleExceeded(const std::string& msg)
      : Error("test-scale-exceeded", msg) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error("numerical", msg) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error("parse", "line " + std::to_string(line) + ": " + msg), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error("validation", msg) {}
};

class DuplicateEntry : public Error {
 public:
  explicit DuplicateEntry(const std::string& msg) : Error("duplicate-entry", msg) {}
};

class UndefinedMetric : public Error {
 public:
  explicit UndefinedMetric(const std::string& msg)
      : Error("undefined-metric", msg) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& msg) : Error("divergence", msg) {}
};

}  // namespace thetanorm
