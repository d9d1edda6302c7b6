#pragma once

#include <optional>

#include <Eigen/Core>

#include "strongcorr/correlation.hpp"
#include "strongcorr/gls.hpp"
#include "strongcorr/linalg.hpp"

namespace strongcorr {

/// Eigenpairs of a covariance matrix, eigenvalues sorted descending. Each
/// eigenvector is oriented so that its largest-magnitude entry is positive.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // lambda_1 >= ... >= lambda_n >= 0
  Eigen::MatrixXd eigenvectors;  // columns v_1 ... v_n
  bool clamped = false;          // some round-off negatives were set to 0

  Eigen::Index size() const noexcept { return eigenvalues.size(); }
  Eigen::VectorXd leading_vector() const { return eigenvectors.col(0); }
};

/// Throws Error(kNotSymmetric) beyond kSymmetryTolerance relative asymmetry,
/// Error(kIndefinite) for eigenvalues below -kPsdFloor * lambda_1.
SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& sigma);

struct MembershipResult {
  bool member = false;
  double residual = 0.0;  // || v - P_X v ||
};

/// Is the unit vector v1 in the column space of X? The residual is always
/// reported, membership is residual <= tol.
MembershipResult v1_membership(const DesignMatrix& x, const Eigen::VectorXd& v1,
                               double tol = kMembershipTolerance);

/// Z = Q^t y, X~ = Q^t X, with the eigenvalues carried alongside.
struct TransformedSystem {
  Eigen::VectorXd z;
  Eigen::MatrixXd x_tilde;
  Eigen::VectorXd lambda;
};

TransformedSystem transform_to_eigenbasis(const Observation& y,
                                          const DesignMatrix& x,
                                          const SpectralDecomposition& spectrum);

/// Inverse of the observation part of transform_to_eigenbasis: y = Q z.
Eigen::VectorXd recover_observation(const TransformedSystem& system,
                                    const SpectralDecomposition& spectrum);

struct ReducedDesign {
  Eigen::MatrixXd matrix;  // rows v_j^t X for j > k
  Eigen::Index rank = 0;
};

/// Drops the first k eigen-directions. Rank uses a cutoff relative to the
/// largest singular value of X itself, so an all-round-off projection has
/// rank 0.
ReducedDesign reduced_design(const DesignMatrix& x,
                             const SpectralDecomposition& spectrum,
                             Eigen::Index drop);

/// Invertible m x m W such that the first column of X W is v1 and the other
/// columns of X W are orthogonal to v1. Requires v1 in the column space of X.
Eigen::MatrixXd reparametrize(const DesignMatrix& x, const Eigen::VectorXd& v1);

/// Structural prediction of the estimator covariance in the
/// full-correlation limit.
struct LimitReport {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  bool v1_in_column_space = false;
  double v1_residual = 0.0;
  Eigen::VectorXd v1;
  /// Independent combinations of beta determined exactly in the limit; this
  /// is also the rank r of X projected onto the noise-free subspace.
  Eigen::Index exact_dimension = 0;
  Eigen::Index noisy_dimension = 0;
  /// 0 when every combination is exact, otherwise the noise carried by the
  /// noisy combinations, trace of the limiting covariance (sum sigma_j^2).
  double predicted_total_variance = 0.0;
  Eigen::Index reduced_rank = 0;
  std::optional<Eigen::Index> covariance_limit_rank;
};

/// Rank-one limit Sigma -> (e o sigma)(e o sigma)^t. v1 is built
/// analytically as e_j sigma_j / ||sigma||. Requires n > m and full-rank X.
LimitReport limit_variance_prediction(const DesignMatrix& x,
                                      const Eigen::VectorXd& sigmas,
                                      const SignVector& signs);

/// General limit with a (possibly higher rank r') singular limiting
/// covariance, e.g. block compositions where only some blocks become fully
/// correlated. The noise-free subspace is the null space of the limit.
LimitReport limit_variance_prediction(const DesignMatrix& x,
                                      const Eigen::MatrixXd& limit_covariance);

/// Estimator for an exactly singular covariance: the equations in the null
/// space of Sigma are imposed as exact constraints and the remaining
/// combinations are fitted by weighted least squares in the noisy subspace.
struct NoiseFreeFit {
  Eigen::MatrixXd weights;     // m x n, beta_hat = weights * y
  Eigen::MatrixXd covariance;  // m x m
  Eigen::Index exact_dimension = 0;
  Eigen::Index covariance_rank = 0;  // r' of Sigma
};

/// Throws Error(kRankDeficient) if the exact and noisy equations together
/// do not identify beta.
NoiseFreeFit noise_free_fit(const DesignMatrix& x, const Eigen::MatrixXd& sigma);

}  // namespace strongcorr
