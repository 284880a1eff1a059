#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparch {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input, violated precondition, or inconsistent configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input file could not be parsed; carries the 1-based line and column.
class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& what)
      : InvalidArgument(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                        ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A value outside the mathematical domain of an operation, e.g. ln|0|.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::vector<std::size_t> indices)
      : Error(what), indices_(std::move(indices)) {}

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

/// Solved squared observations went negative: the error draw violates the
/// nonnegativity condition on (I - A^2)^{-1}.
class RegularityViolation : public Error {
 public:
  RegularityViolation(const std::string& what, std::uint64_t seed)
      : Error(what), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

/// A linear system that must be solved is singular.
class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, std::uint64_t seed = 0) : Error(what), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

/// The optimizer exhausted its budget; best_point holds the best iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_point, double best_value)
      : Error(what), best_point_(std::move(best_point)), best_value_(best_value) {}

  const std::vector<double>& best_point() const noexcept { return best_point_; }
  double best_value() const noexcept { return best_value_; }

 private:
  std::vector<double> best_point_;
  double best_value_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparch
