#pragma once

#include <Eigen/Core>

namespace strongcorr {

// Shared numerical thresholds. Every module reads these instead of
// hard-coding its own so the CLI and the tests agree on one set of knobs.
inline constexpr double kPsdFloor = 1e-10;            // eigenvalue floor, relative to the largest
inline constexpr double kConditioningFloor = 1e-13;   // min/max eigenvalue ratio for a full-rank solve
inline constexpr double kRankTolerance = 1e-10;       // singular-value cutoff, relative to the largest
inline constexpr double kMembershipTolerance = 1e-8;  // residual of a unit vector from a column space
inline constexpr double kSymmetryTolerance = 1e-10;   // relative asymmetry accepted by spectral routines
inline constexpr double kTieGap = 1e-12;              // relative gap separating sigma1 from sigma2

namespace linalg {

/// Largest singular value; 0 for an empty matrix.
double largest_singular_value(const Eigen::MatrixXd& a);

/// Number of singular values above rel_tol * reference. Passing the scale of
/// a parent matrix as reference keeps projected matrices from being judged
/// against their own (possibly tiny) norm.
Eigen::Index numerical_rank(const Eigen::MatrixXd& a, double reference,
                            double rel_tol = kRankTolerance);
Eigen::Index numerical_rank(const Eigen::MatrixXd& a,
                            double rel_tol = kRankTolerance);

/// Orthonormal basis of the column space (rank columns).
Eigen::MatrixXd column_basis(const Eigen::MatrixXd& a, double reference,
                             double rel_tol = kRankTolerance);

/// Orthonormal basis of the null space of a (a.cols() - rank columns).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double reference,
                           double rel_tol = kRankTolerance);

/// max |a_ij - a_ji| / max |a_ij|; 0 for the zero matrix.
double relative_asymmetry(const Eigen::MatrixXd& a);

bool all_finite(const Eigen::MatrixXd& a);

}  // namespace linalg
}  // namespace strongcorr
