#pragma once

#include <Eigen/Core>

#include "strongcorr/linalg.hpp"

namespace strongcorr {

/// n x m matrix of covariates, n >= m >= 1. The numerical rank is computed
/// once at construction and reported; rank deficiency is diagnosed by the
/// solvers rather than rejected here, so callers can inspect it.
class DesignMatrix {
 public:
  explicit DesignMatrix(Eigen::MatrixXd x, double rank_tolerance = kRankTolerance);

  /// Column of n ones: the mean-estimation design.
  static DesignMatrix ones(Eigen::Index n);

  Eigen::Index rows() const noexcept { return x_.rows(); }
  Eigen::Index cols() const noexcept { return x_.cols(); }
  const Eigen::MatrixXd& matrix() const noexcept { return x_; }
  Eigen::Index rank() const noexcept { return rank_; }
  bool full_rank() const noexcept { return rank_ == x_.cols(); }
  double largest_singular_value() const noexcept { return sigma_max_; }
  double rank_tolerance() const noexcept { return rank_tolerance_; }

 private:
  Eigen::MatrixXd x_;
  double rank_tolerance_;
  double sigma_max_ = 0.0;
  Eigen::Index rank_ = 0;
};

/// Measurement vector Y with finite entries.
class Observation {
 public:
  explicit Observation(Eigen::VectorXd y);

  Eigen::Index size() const noexcept { return y_.size(); }
  const Eigen::VectorXd& values() const noexcept { return y_; }

 private:
  Eigen::VectorXd y_;
};

struct GlsOptions {
  double conditioning_floor = kConditioningFloor;
  double rank_tolerance = kRankTolerance;
};

/// Spectrum extremes seen by the solver.
struct ConditionReport {
  double sigma_min_eigenvalue = 0.0;
  double sigma_max_eigenvalue = 0.0;
  double normal_min_eigenvalue = 0.0;  // of X^t Sigma^-1 X
  double normal_max_eigenvalue = 0.0;

  double sigma_ratio() const {
    return sigma_max_eigenvalue > 0.0 ? sigma_min_eigenvalue / sigma_max_eigenvalue
                                      : 0.0;
  }
};

struct BlueResult {
  Eigen::VectorXd beta_hat;    // m
  Eigen::MatrixXd covariance;  // m x m, (X^t Sigma^-1 X)^-1
  Eigen::MatrixXd weights;     // m x n, beta_hat = weights * y
  double chi_squared = 0.0;    // at beta_hat
  ConditionReport condition;
};

/// (y - X beta)^t Sigma^-1 (y - X beta), evaluated in the eigenbasis of Sigma.
double chi_squared(const Observation& y, const DesignMatrix& x,
                   const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma,
                   const GlsOptions& options = {});

/// Best linear unbiased estimate. Sigma is eigendecomposed once and the
/// problem is solved in the decorrelated basis; Sigma^-1 is never formed.
/// Throws IllConditionedError below the conditioning floor and Error
/// (kRankDeficient) when X lacks full column rank.
BlueResult blue_fit(const Observation& y, const DesignMatrix& x,
                    const Eigen::MatrixXd& sigma, const GlsOptions& options = {});

Eigen::MatrixXd estimator_covariance(const DesignMatrix& x,
                                     const Eigen::MatrixXd& sigma,
                                     const GlsOptions& options = {});

Eigen::MatrixXd estimator_weights(const DesignMatrix& x,
                                  const Eigen::MatrixXd& sigma,
                                  const GlsOptions& options = {});

/// Variance of the two-measurement BLUE of a common mean,
///   V = (1 - rho^2) / (tau1^2 - 2 rho tau1 tau2 + tau2^2),  tau = 1/sigma.
/// |rho| = 1 returns the analytic limit: 0, except rho = 1 with
/// sigma1 == sigma2 (within kTieGap), which gives sigma1^2.
double two_point_mean_variance(double sigma1, double sigma2, double rho);

/// rho -> 1 limit of the two-measurement BLUE,
///   (tau1 y1 - tau2 y2) / (tau1 - tau2).
/// Throws Error(kDegenerateLimit) when sigma1 == sigma2 within kTieGap.
double two_point_full_correlation_estimate(double y1, double y2, double sigma1,
                                           double sigma2);

/// Symmetric tridiagonal matrix stored as its two distinct diagonals.
class TridiagonalMatrix {
 public:
  TridiagonalMatrix(Eigen::VectorXd diagonal, Eigen::VectorXd off_diagonal);

  Eigen::Index size() const noexcept { return diagonal_.size(); }
  const Eigen::VectorXd& diagonal() const noexcept { return diagonal_; }
  const Eigen::VectorXd& off_diagonal() const noexcept { return off_diagonal_; }

  Eigen::MatrixXd to_dense() const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;
  /// v^t A v
  double quadratic_form(const Eigen::VectorXd& v) const;

 private:
  Eigen::VectorXd diagonal_;
  Eigen::VectorXd off_diagonal_;
};

/// Inverse of the AR(1) correlation matrix rho^|i-j|, which is tridiagonal.
TridiagonalMatrix ar1_precision(Eigen::Index n_points, double rho);

}  // namespace strongcorr
