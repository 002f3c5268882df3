#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergmpool {

// Root of every error the library throws. The CLI maps the branches below
// onto exit codes (usage 1, estimation 2, I/O 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or malformed argument.
class UsageError : public Error {
 public:
  using Error::Error;
};

class IndexError : public UsageError {
 public:
  using UsageError::UsageError;
};

class DimensionError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Attempt to toggle a fixed dyad, or a graph contradicting a constraint.
class ConstraintError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Bad term specification: missing covariate, unknown level, duplicate or
// non-identifiable term.
class ModelError : public UsageError {
 public:
  using UsageError::UsageError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : IoError(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

// The target statistics sit on a face of, or outside, the convex hull of
// achievable statistics, so no finite maximizer exists.
class HullInfeasibleError : public EstimationError {
 public:
  HullInfeasibleError(const std::string& what, std::vector<std::size_t> coordinates,
                      std::vector<std::string> labels = {})
      : EstimationError(what), coordinates_(std::move(coordinates)), labels_(std::move(labels)) {}

  const std::vector<std::size_t>& coordinates() const noexcept { return coordinates_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::size_t> coordinates_;
  std::vector<std::string> labels_;
};

// Numerical failure: singular matrix, non positive definite covariance.
class NumericalError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace ergmpool
