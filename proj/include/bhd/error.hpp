#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bhd {

/// Base of every error thrown by the library. The CLI maps each subclass to
/// its own exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Malformed input text. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Transfer-parameter conversion is singular (S21 = 0) at `frequency()`.
class SingularityError : public Error {
public:
  SingularityError(const std::string& what, double frequency)
      : Error(what), frequency_(frequency) {}
  double frequency() const noexcept { return frequency_; }

private:
  double frequency_;
};

class SizingError : public Error {
public:
  using Error::Error;
};

class CalibrationError : public Error {
public:
  using Error::Error;
};

class MeasurementError : public Error {
public:
  using Error::Error;
};

/// A statistical test cannot be applied (input too short, parameter too
/// large). Not a test failure.
class ApplicabilityError : public Error {
public:
  using Error::Error;
};

/// Configuration rejected; `issues()` lists each offending key.
class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration";
    for (const auto& i : v) s += "\n  " + i;
    return s;
  }
  std::vector<std::string> issues_;
};

}  // namespace bhd
