#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "strongcorr/linalg.hpp"

namespace strongcorr {

/// Symmetric, unit-diagonal, positive semidefinite matrix of correlation
/// coefficients. Stored dense. Construction validates the invariants and
/// keeps the extreme eigenvalues as validity metadata; near-singular inputs
/// (the full-correlation regime) are accepted down to an eigenvalue floor of
/// -kPsdFloor * lambda_max.
class CorrelationMatrix {
 public:
  /// Validates and wraps `entries`. Throws Error on any violated invariant.
  explicit CorrelationMatrix(Eigen::MatrixXd entries);

  static CorrelationMatrix identity(Eigen::Index n);

  Eigen::Index size() const noexcept { return entries_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const {
    return entries_(i, j);
  }

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  double max_eigenvalue() const noexcept { return max_eigenvalue_; }
  /// Eigenvalues above kRankTolerance * lambda_max.
  Eigen::Index numerical_rank() const noexcept { return rank_; }

 private:
  Eigen::MatrixXd entries_;
  double min_eigenvalue_ = 1.0;
  double max_eigenvalue_ = 1.0;
  Eigen::Index rank_ = 0;
};

/// Entries e_j in {+1, -1} describing the rank-one limit R = e e^t.
class SignVector {
 public:
  explicit SignVector(std::vector<int> signs);

  static SignVector all_positive(Eigen::Index n);
  static SignVector alternating(Eigen::Index n);  // (+1, -1, +1, ...)

  Eigen::Index size() const noexcept {
    return static_cast<Eigen::Index>(signs_.size());
  }
  int operator[](Eigen::Index i) const { return signs_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& values() const noexcept { return signs_; }
  Eigen::VectorXd as_vector() const;

  friend bool operator==(const SignVector&, const SignVector&) = default;

 private:
  std::vector<int> signs_;
};

/// Standard deviations plus correlation; Sigma = S R S.
class CovarianceModel {
 public:
  CovarianceModel(Eigen::VectorXd sigmas, CorrelationMatrix correlation);

  /// Splits a covariance matrix back into deviations sqrt(Sigma_ii) and
  /// coefficients Sigma_ij / (sigma_i sigma_j).
  static CovarianceModel from_covariance(const Eigen::MatrixXd& sigma);

  Eigen::Index size() const noexcept { return sigmas_.size(); }
  const Eigen::VectorXd& sigmas() const noexcept { return sigmas_; }
  const CorrelationMatrix& correlation() const noexcept { return correlation_; }

 private:
  Eigen::VectorXd sigmas_;
  CorrelationMatrix correlation_;
};

/// rho^|i-j|, the AR(1) autocorrelation model. |rho| < 1.
CorrelationMatrix ar1_correlation(Eigen::Index n, double rho);

/// exp(-|x_i - x_j| / delta).
CorrelationMatrix exponential_correlation(std::span<const double> locations,
                                          double delta);

/// e e^t, the full-correlation limit.
CorrelationMatrix rank_one_limit(const SignVector& signs);

/// Block-diagonal assembly with zero cross-block correlation.
CorrelationMatrix block_correlation(std::span<const CorrelationMatrix> blocks);

/// max over off-diagonal pairs of 1 - |rho_ij|. Returns 0 for n = 1.
double kappa(const CorrelationMatrix& r);

inline constexpr double kDefaultSignThreshold = 0.5;

/// Recovers e from a nearly fully correlated R with e_1 = +1 and
/// e_j = sign(rho_1j). Throws SignError if some |rho_ij| is at or below the
/// threshold (indeterminate) or if sign(rho_ij) != e_i e_j (inconsistent).
SignVector sign_vector(const CorrelationMatrix& r,
                       double sign_threshold = kDefaultSignThreshold);

/// Sigma_ij = sigma_i sigma_j rho_ij.
Eigen::MatrixXd assemble_covariance(const CovarianceModel& model);

}  // namespace strongcorr
