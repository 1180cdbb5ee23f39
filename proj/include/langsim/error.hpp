#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace langsim {

/// Base class for every error raised by the toolkit. `kind()` is a stable
/// machine-readable tag used by the CLI's single-line error output.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
  virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}
  explicit ParseError(const std::string& message) : Error(message) {}

  std::size_t line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "parse"; }

 private:
  std::size_t line_ = 0;
};

/// Well-formed input that violates a cross-record invariant.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& source, std::size_t line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}
  explicit ValidationError(const std::string& message) : Error(message) {}

  std::size_t line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "validation"; }

 private:
  std::size_t line_ = 0;
};

/// Caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

/// Gold and predicted corpora are not segmented identically.
class AlignmentError : public Error {
 public:
  AlignmentError(std::size_t sentence, const std::string& message)
      : Error("sentence " + std::to_string(sentence) + ": " + message), sentence_(sentence) {}

  std::size_t sentence() const noexcept { return sentence_; }
  const char* kind() const noexcept override { return "alignment"; }

 private:
  std::size_t sentence_ = 0;
};

/// A statistic is undefined for the given input (constant series, n too small).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "undefined"; }
};

/// Least-squares design matrix without full column rank.
class SingularMatrix : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "singular"; }
};

class TrainingError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "training"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace langsim
