#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dqcalib {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Input,       ///< malformed arguments or files, precondition violations
  Constraint,  ///< a value is off its constraint manifold (e.g. non-unit DQ)
  Numeric,     ///< an iterative method failed to converge or bracket
  Degenerate,  ///< the data does not determine a unique solution
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

struct ConstraintError : Error {
  explicit ConstraintError(const std::string& what)
      : Error(ErrorKind::Constraint, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::Numeric, what) {}
};

struct DegenerateError : Error {
  explicit DegenerateError(const std::string& what)
      : Error(ErrorKind::Degenerate, what) {}
};

/// A matrix that should be invertible is singular or too ill-conditioned.
struct RankError : DegenerateError {
  RankError(const std::string& what, double condition)
      : DegenerateError(what), condition(condition) {}
  double condition;
};

/// Cholesky met a non-positive pivot.
struct DefinitenessError : DegenerateError {
  DefinitenessError(const std::string& what, int pivot)
      : DegenerateError(what), pivot(pivot) {}
  int pivot;
};

/// Trajectory file problems, with the 1-based offending line.
struct ParseError : InputError {
  ParseError(const std::string& what, std::size_t line)
      : InputError("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

/// Exit codes used by the command-line tool.
inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Input:
    case ErrorKind::Constraint:
      return 2;
    case ErrorKind::Numeric:
      return 3;
    case ErrorKind::Degenerate:
      return 4;
  }
  return 1;
}

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Input:
      return "input";
    case ErrorKind::Constraint:
      return "constraint";
    case ErrorKind::Numeric:
      return "numeric";
    case ErrorKind::Degenerate:
      return "degenerate";
  }
  return "unknown";
}

}  // namespace dqcalib
