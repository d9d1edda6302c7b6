#include "strongcorr/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "strongcorr/error.hpp"

namespace strongcorr {

namespace {

void orient(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index pivot = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&pivot);
    if (vectors(pivot, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

void require_full_rank(const DesignMatrix& x) {
  if (!x.full_rank()) {
    std::ostringstream msg;
    msg << "design matrix is rank deficient: numerical rank " << x.rank()
        << " < " << x.cols() << " columns";
    throw Error(ErrorKind::kRankDeficient, msg.str());
  }
}

void require_overdetermined(const DesignMatrix& x) {
  if (x.rows() <= x.cols()) {
    std::ostringstream msg;
    msg << "limit prediction needs n > m, got n = " << x.rows()
        << ", m = " << x.cols();
    throw Error(ErrorKind::kUnderdetermined, msg.str());
  }
}

Eigen::Index count_significant(const Eigen::VectorXd& descending) {
  const double cutoff = kRankTolerance * descending(0);
  Eigen::Index count = 0;
  while (count < descending.size() && descending(count) > cutoff) ++count;
  return count;
}

}  // namespace

SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& sigma) {
  const Eigen::Index n = sigma.rows();
  if (n < 1 || sigma.cols() != n) {
    throw Error(ErrorKind::kDimensionMismatch, "covariance matrix must be square");
  }
  if (!sigma.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "covariance has non-finite entries");
  }
  const double asymmetry = linalg::relative_asymmetry(sigma);
  if (asymmetry > kSymmetryTolerance) {
    std::ostringstream msg;
    msg << "covariance is not symmetric: relative asymmetry " << asymmetry;
    throw Error(ErrorKind::kNotSymmetric, msg.str());
  }

  const Eigen::MatrixXd symmetric = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kInvalidArgument, "eigendecomposition did not converge");
  }

  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  orient(out.eigenvectors);

  const double largest = std::max(out.eigenvalues(0), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double& lambda = out.eigenvalues(i);
    if (lambda >= 0.0) continue;
    if (lambda < -kPsdFloor * largest) {
      std::ostringstream msg;
      msg << "covariance is indefinite: eigenvalue " << lambda
          << " below floor " << -kPsdFloor * largest;
      throw Error(ErrorKind::kIndefinite, msg.str());
    }
    lambda = 0.0;
    out.clamped = true;
  }
  return out;
}

MembershipResult v1_membership(const DesignMatrix& x, const Eigen::VectorXd& v1,
                               double tol) {
  if (!(tol > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "membership tolerance must be > 0");
  }
  if (v1.size() != x.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "v1 length does not match the number of design rows");
  }
  if (std::abs(v1.norm() - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "v1 must have unit norm, got " << v1.norm();
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  const Eigen::MatrixXd basis = linalg::column_basis(
      x.matrix(), x.largest_singular_value(), x.rank_tolerance());
  const Eigen::VectorXd residual = v1 - basis * (basis.transpose() * v1);
  MembershipResult result;
  result.residual = residual.norm();
  result.member = result.residual <= tol;
  return result;
}

TransformedSystem transform_to_eigenbasis(const Observation& y,
                                          const DesignMatrix& x,
                                          const SpectralDecomposition& spectrum) {
  if (y.size() != x.rows() || spectrum.size() != x.rows()) {
    std::ostringstream msg;
    msg << "transform: y has " << y.size() << " entries, design " << x.rows()
        << " rows, spectrum " << spectrum.size() << " eigenpairs";
    throw Error(ErrorKind::kDimensionMismatch, msg.str());
  }
  TransformedSystem out;
  out.z = spectrum.eigenvectors.transpose() * y.values();
  out.x_tilde = spectrum.eigenvectors.transpose() * x.matrix();
  out.lambda = spectrum.eigenvalues;
  return out;
}

Eigen::VectorXd recover_observation(const TransformedSystem& system,
                                    const SpectralDecomposition& spectrum) {
  if (system.z.size() != spectrum.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "recover: size mismatch");
  }
  return spectrum.eigenvectors * system.z;
}

ReducedDesign reduced_design(const DesignMatrix& x,
                             const SpectralDecomposition& spectrum,
                             Eigen::Index drop) {
  const Eigen::Index n = x.rows();
  if (spectrum.size() != n) {
    throw Error(ErrorKind::kDimensionMismatch, "reduced_design: size mismatch");
  }
  if (drop < 0 || drop >= n) {
    std::ostringstream msg;
    msg << "reduced_design: drop count " << drop << " outside [0, " << n << ")";
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  ReducedDesign out;
  out.matrix = spectrum.eigenvectors.rightCols(n - drop).transpose() * x.matrix();
  out.rank = linalg::numerical_rank(out.matrix, x.largest_singular_value(),
                                    x.rank_tolerance());
  return out;
}

Eigen::MatrixXd reparametrize(const DesignMatrix& x, const Eigen::VectorXd& v1) {
  const MembershipResult membership = v1_membership(x, v1);
  if (!membership.member) {
    std::ostringstream msg;
    msg << "v1 is not in the column space of X (residual " << membership.residual
        << "); the estimator covariance vanishes in the limit, no "
           "reparametrization is needed";
    throw Error(ErrorKind::kPrecondition, msg.str());
  }
  require_full_rank(x);

  const Eigen::Index m = x.cols();
  // X c = v1 exactly (up to the membership residual).
  const Eigen::VectorXd c = x.matrix().colPivHouseholderQr().solve(v1);
  const Eigen::VectorXd g = x.matrix().transpose() * v1;  // v1^t X as a column

  Eigen::Index pivot = 0;
  c.cwiseAbs().maxCoeff(&pivot);

  // Columns e_j - (v1^t X e_j) c are annihilated by v1^t X, and together
  // with c they span R^m because c_pivot != 0.
  Eigen::MatrixXd w(m, m);
  w.col(0) = c;
  Eigen::Index column = 1;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (j == pivot) continue;
    Eigen::VectorXd u = -g(j) * c;
    u(j) += 1.0;
    w.col(column++) = u;
  }
  return w;
}

LimitReport limit_variance_prediction(const DesignMatrix& x,
                                      const Eigen::VectorXd& sigmas,
                                      const SignVector& signs) {
  const Eigen::Index n = x.rows();
  if (sigmas.size() != n || signs.size() != n) {
    std::ostringstream msg;
    msg << "limit prediction: design has " << n << " rows, sigma "
        << sigmas.size() << " entries, signs " << signs.size();
    throw Error(ErrorKind::kDimensionMismatch, msg.str());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sigmas(i) > 0.0) || !std::isfinite(sigmas(i))) {
      throw Error(ErrorKind::kInvalidArgument, "deviations must be finite and > 0");
    }
  }
  require_overdetermined(x);
  require_full_rank(x);

  LimitReport report;
  report.n = n;
  report.m = x.cols();
  report.v1 = signs.as_vector().cwiseProduct(sigmas) / sigmas.norm();

  const MembershipResult membership = v1_membership(x, report.v1);
  report.v1_in_column_space = membership.member;
  report.v1_residual = membership.residual;

  const Eigen::MatrixXd projector =
      Eigen::MatrixXd::Identity(n, n) - report.v1 * report.v1.transpose();
  report.reduced_rank = linalg::numerical_rank(
      projector * x.matrix(), x.largest_singular_value(), x.rank_tolerance());

  report.exact_dimension = membership.member ? report.m - 1 : report.m;
  report.noisy_dimension = report.m - report.exact_dimension;
  report.predicted_total_variance =
      report.noisy_dimension > 0 ? sigmas.squaredNorm() : 0.0;
  report.covariance_limit_rank = 1;
  return report;
}

LimitReport limit_variance_prediction(const DesignMatrix& x,
                                      const Eigen::MatrixXd& limit_covariance) {
  const Eigen::Index n = x.rows();
  if (limit_covariance.rows() != n || limit_covariance.cols() != n) {
    throw Error(ErrorKind::kDimensionMismatch,
                "limit covariance does not match the design rows");
  }
  require_overdetermined(x);
  require_full_rank(x);

  const SpectralDecomposition spectrum = spectral_decompose(limit_covariance);
  if (!(spectrum.eigenvalues(0) > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "limit covariance is zero");
  }
  const Eigen::Index limit_rank = count_significant(spectrum.eigenvalues);

  LimitReport report;
  report.n = n;
  report.m = x.cols();
  report.v1 = spectrum.leading_vector();
  const MembershipResult membership = v1_membership(x, report.v1);
  report.v1_in_column_space = membership.member;
  report.v1_residual = membership.residual;

  const Eigen::MatrixXd noise_free =
      spectrum.eigenvectors.rightCols(n - limit_rank);
  report.reduced_rank = linalg::numerical_rank(
      noise_free.transpose() * x.matrix(), x.largest_singular_value(),
      x.rank_tolerance());
  report.exact_dimension = report.reduced_rank;
  report.noisy_dimension = report.m - report.exact_dimension;
  report.predicted_total_variance =
      report.noisy_dimension > 0 ? limit_covariance.trace() : 0.0;
  report.covariance_limit_rank = limit_rank;
  return report;
}

NoiseFreeFit noise_free_fit(const DesignMatrix& x, const Eigen::MatrixXd& sigma) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw Error(ErrorKind::kDimensionMismatch,
                "covariance does not match the design rows");
  }
  require_full_rank(x);

  const SpectralDecomposition spectrum = spectral_decompose(sigma);
  if (!(spectrum.eigenvalues(0) > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "covariance is zero");
  }
  const Eigen::Index noisy_rank = count_significant(spectrum.eigenvalues);
  const Eigen::MatrixXd noisy_basis = spectrum.eigenvectors.leftCols(noisy_rank);
  const Eigen::MatrixXd free_basis = spectrum.eigenvectors.rightCols(n - noisy_rank);
  const double reference = x.largest_singular_value();

  NoiseFreeFit out;
  out.covariance_rank = noisy_rank;

  // Exact constraints N^t y = N^t X beta pin down the row space of A.
  Eigen::MatrixXd exact_weights = Eigen::MatrixXd::Zero(m, n);
  Eigen::MatrixXd free_directions = Eigen::MatrixXd::Identity(m, m);
  if (free_basis.cols() > 0) {
    const Eigen::MatrixXd a = free_basis.transpose() * x.matrix();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > x.rank_tolerance() * reference) ++rank;
    out.exact_dimension = rank;
    const Eigen::MatrixXd pinv =
        svd.matrixV().leftCols(rank) *
        s.head(rank).cwiseInverse().asDiagonal() *
        svd.matrixU().leftCols(rank).transpose();
    exact_weights = pinv * free_basis.transpose();
    free_directions = svd.matrixV().rightCols(m - rank);
  }

  const Eigen::Index remaining = free_directions.cols();
  out.weights = exact_weights;
  out.covariance = Eigen::MatrixXd::Zero(m, m);
  if (remaining == 0) return out;

  // Remaining combinations theta (beta = beta_0 + K theta) from the noisy
  // equations, whitened by the surviving eigenvalues.
  const Eigen::VectorXd inv_sqrt =
      spectrum.eigenvalues.head(noisy_rank).array().rsqrt();
  const Eigen::MatrixXd whiten = inv_sqrt.asDiagonal() * noisy_basis.transpose();
  const Eigen::MatrixXd b = whiten * x.matrix() * free_directions;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() < remaining || !(s(remaining - 1) > kRankTolerance * s(0))) {
    std::ostringstream msg;
    msg << "noisy equations cannot identify the " << remaining
        << " combinations left free by the exact constraints";
    throw Error(ErrorKind::kRankDeficient, msg.str());
  }
  const Eigen::VectorXd inv_s = s.cwiseInverse();
  const Eigen::MatrixXd b_pinv =
      svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
  const Eigen::MatrixXd residual_map =
      Eigen::MatrixXd::Identity(n, n) - x.matrix() * exact_weights;
  out.weights += free_directions * b_pinv * whiten * residual_map;

  const Eigen::MatrixXd theta_cov =
      svd.matrixV() * inv_s.cwiseAbs2().asDiagonal() * svd.matrixV().transpose();
  Eigen::MatrixXd cov = free_directions * theta_cov * free_directions.transpose();
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

}  // namespace strongcorr
