#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace strongcorr {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kNotSymmetric,
  kIndefinite,
  kSignIndeterminate,
  kSignInconsistent,
  kDegenerateLimit,
  kIllConditioned,
  kRankDeficient,
  kOutsideRegime,
  kUnderdetermined,
  kPrecondition,
  kParse,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the toolkit. The kind lets
/// callers (the CLI in particular) map failures to exit codes without
/// string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a covariance matrix is too close to singular for a
/// full-rank solve. Carries the spectrum extremes that tripped the floor.
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, double smallest_eigenvalue,
                      double largest_eigenvalue, double floor)
      : Error(ErrorKind::kIllConditioned, what),
        smallest_eigenvalue_(smallest_eigenvalue),
        largest_eigenvalue_(largest_eigenvalue),
        floor_(floor) {}

  double smallest_eigenvalue() const noexcept { return smallest_eigenvalue_; }
  double largest_eigenvalue() const noexcept { return largest_eigenvalue_; }
  double floor() const noexcept { return floor_; }

 private:
  double smallest_eigenvalue_;
  double largest_eigenvalue_;
  double floor_;
};

/// Sign-vector extraction failure; names the offending (row, column) pair.
class SignError : public Error {
 public:
  SignError(ErrorKind kind, const std::string& what, Eigen::Index row,
            Eigen::Index col)
      : Error(kind, what), row_(row), col_(col) {}

  Eigen::Index row() const noexcept { return row_; }
  Eigen::Index col() const noexcept { return col_; }

 private:
  Eigen::Index row_;
  Eigen::Index col_;
};

}  // namespace strongcorr
