#include "strongcorr/gls.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "strongcorr/error.hpp"
#include "strongcorr/subspace.hpp"

namespace strongcorr {

namespace {

void check_sigma_shape(const DesignMatrix& x, const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != x.rows() || sigma.cols() != x.rows()) {
    std::ostringstream msg;
    msg << "covariance is " << sigma.rows() << "x" << sigma.cols()
        << " but the design has " << x.rows() << " rows";
    throw Error(ErrorKind::kDimensionMismatch, msg.str());
  }
}

void check_conditioning(const SpectralDecomposition& spectrum, double floor) {
  const double largest = spectrum.eigenvalues(0);
  const double smallest = spectrum.eigenvalues(spectrum.size() - 1);
  if (!(largest > 0.0) || smallest < floor * largest) {
    std::ostringstream msg;
    msg << "covariance too ill-conditioned for a full-rank solve: "
        << "lambda_min = " << smallest << ", lambda_max = " << largest
        << ", ratio below conditioning floor " << floor
        << "; use limit_variance_prediction / noise_free_fit for the "
           "full-correlation limit";
    throw IllConditionedError(msg.str(), smallest, largest, floor);
  }
}

struct Solution {
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd weights;
  SpectralDecomposition spectrum;
  ConditionReport condition;
};

Solution solve(const DesignMatrix& x, const Eigen::MatrixXd& sigma,
               const GlsOptions& options) {
  check_sigma_shape(x, sigma);
  if (x.rank() < x.cols()) {
    std::ostringstream msg;
    msg << "design matrix is rank deficient: numerical rank " << x.rank()
        << " < " << x.cols() << " columns";
    throw Error(ErrorKind::kRankDeficient, msg.str());
  }

  Solution out;
  out.spectrum = spectral_decompose(sigma);
  check_conditioning(out.spectrum, options.conditioning_floor);

  // Whitened design Lambda^-1/2 Q^t X.
  const Eigen::VectorXd inv_sqrt = out.spectrum.eigenvalues.array().rsqrt();
  const Eigen::MatrixXd qt = out.spectrum.eigenvectors.transpose();
  const Eigen::MatrixXd whitened = inv_sqrt.asDiagonal() * (qt * x.matrix());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index m = x.cols();
  if (!(s(m - 1) > options.rank_tolerance * s(0))) {
    throw Error(ErrorKind::kRankDeficient,
                "whitened design is numerically rank deficient");
  }

  const Eigen::VectorXd inv_s = s.cwiseInverse();
  const Eigen::MatrixXd& v = svd.matrixV();
  Eigen::MatrixXd cov = v * inv_s.cwiseAbs2().asDiagonal() * v.transpose();
  out.covariance = 0.5 * (cov + cov.transpose());
  out.weights = v * inv_s.asDiagonal() * svd.matrixU().transpose() *
                inv_sqrt.asDiagonal() * qt;

  out.condition.sigma_max_eigenvalue = out.spectrum.eigenvalues(0);
  out.condition.sigma_min_eigenvalue =
      out.spectrum.eigenvalues(out.spectrum.size() - 1);
  out.condition.normal_max_eigenvalue = s(0) * s(0);
  out.condition.normal_min_eigenvalue = s(m - 1) * s(m - 1);
  return out;
}

double whitened_norm_squared(const SpectralDecomposition& spectrum,
                             const Eigen::VectorXd& residual) {
  const Eigen::VectorXd z = spectrum.eigenvectors.transpose() * residual;
  return (z.array().square() / spectrum.eigenvalues.array()).sum();
}

}  // namespace

DesignMatrix::DesignMatrix(Eigen::MatrixXd x, double rank_tolerance)
    : x_(std::move(x)), rank_tolerance_(rank_tolerance) {
  if (x_.cols() < 1 || x_.rows() < x_.cols()) {
    std::ostringstream msg;
    msg << "design matrix must satisfy n >= m >= 1, got " << x_.rows() << "x"
        << x_.cols();
    throw Error(ErrorKind::kDimensionMismatch, msg.str());
  }
  if (!x_.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "design matrix has non-finite entries");
  }
  sigma_max_ = linalg::largest_singular_value(x_);
  rank_ = linalg::numerical_rank(x_, sigma_max_, rank_tolerance_);
}

DesignMatrix DesignMatrix::ones(Eigen::Index n) {
  return DesignMatrix(Eigen::MatrixXd::Ones(n, 1));
}

Observation::Observation(Eigen::VectorXd y) : y_(std::move(y)) {
  if (y_.size() < 1) throw Error(ErrorKind::kInvalidArgument, "observation is empty");
  if (!y_.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "observation has non-finite entries");
  }
}

double chi_squared(const Observation& y, const DesignMatrix& x,
                   const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma,
                   const GlsOptions& options) {
  check_sigma_shape(x, sigma);
  if (y.size() != x.rows() || beta.size() != x.cols()) {
    std::ostringstream msg;
    msg << "chi_squared: y has " << y.size() << " entries and beta "
        << beta.size() << " for a " << x.rows() << "x" << x.cols() << " design";
    throw Error(ErrorKind::kDimensionMismatch, msg.str());
  }
  const SpectralDecomposition spectrum = spectral_decompose(sigma);
  check_conditioning(spectrum, options.conditioning_floor);
  return whitened_norm_squared(spectrum, y.values() - x.matrix() * beta);
}

BlueResult blue_fit(const Observation& y, const DesignMatrix& x,
                    const Eigen::MatrixXd& sigma, const GlsOptions& options) {
  if (y.size() != x.rows()) {
    std::ostringstream msg;
    msg << "observation has " << y.size() << " entries but the design has "
        << x.rows() << " rows";
    throw Error(ErrorKind::kDimensionMismatch, msg.str());
  }
  Solution solution = solve(x, sigma, options);
  BlueResult result;
  result.beta_hat = solution.weights * y.values();
  result.chi_squared = whitened_norm_squared(
      solution.spectrum, y.values() - x.matrix() * result.beta_hat);
  result.covariance = std::move(solution.covariance);
  result.weights = std::move(solution.weights);
  result.condition = solution.condition;
  return result;
}

Eigen::MatrixXd estimator_covariance(const DesignMatrix& x,
                                     const Eigen::MatrixXd& sigma,
                                     const GlsOptions& options) {
  return solve(x, sigma, options).covariance;
}

Eigen::MatrixXd estimator_weights(const DesignMatrix& x,
                                  const Eigen::MatrixXd& sigma,
                                  const GlsOptions& options) {
  return solve(x, sigma, options).weights;
}

namespace {

void check_deviation(double sigma, const char* name) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::ostringstream msg;
    msg << name << " = " << sigma << " must be finite and > 0";
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
}

bool is_tie(double sigma1, double sigma2) {
  return std::abs(sigma1 - sigma2) <= kTieGap * std::max(sigma1, sigma2);
}

}  // namespace

double two_point_mean_variance(double sigma1, double sigma2, double rho) {
  check_deviation(sigma1, "sigma1");
  check_deviation(sigma2, "sigma2");
  if (!(std::abs(rho) <= 1.0)) {
    std::ostringstream msg;
    msg << "rho = " << rho << " lies outside [-1, 1]";
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  if (rho == -1.0) return 0.0;
  if (rho == 1.0) return is_tie(sigma1, sigma2) ? sigma1 * sigma1 : 0.0;

  const double tau1 = 1.0 / sigma1;
  const double tau2 = 1.0 / sigma2;
  const double one_minus = 1.0 - rho;
  const double gap = tau1 - tau2;
  return one_minus * (1.0 + rho) /
         (one_minus * (tau1 * tau1 + tau2 * tau2) + rho * gap * gap);
}

double two_point_full_correlation_estimate(double y1, double y2, double sigma1,
                                           double sigma2) {
  check_deviation(sigma1, "sigma1");
  check_deviation(sigma2, "sigma2");
  if (is_tie(sigma1, sigma2)) {
    std::ostringstream msg;
    msg << "full-correlation estimate is degenerate for sigma1 = " << sigma1
        << " and sigma2 = " << sigma2
        << ": equal deviations make the two measurements identical";
    throw Error(ErrorKind::kDegenerateLimit, msg.str());
  }
  const double tau1 = 1.0 / sigma1;
  const double tau2 = 1.0 / sigma2;
  return (tau1 * y1 - tau2 * y2) / (tau1 - tau2);
}

TridiagonalMatrix::TridiagonalMatrix(Eigen::VectorXd diagonal,
                                     Eigen::VectorXd off_diagonal)
    : diagonal_(std::move(diagonal)), off_diagonal_(std::move(off_diagonal)) {
  if (diagonal_.size() < 1 ||
      off_diagonal_.size() != diagonal_.size() - 1) {
    throw Error(ErrorKind::kDimensionMismatch,
                "tridiagonal matrix needs n diagonal and n-1 off-diagonal entries");
  }
}

Eigen::MatrixXd TridiagonalMatrix::to_dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  dense.diagonal() = diagonal_;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    dense(i, i + 1) = off_diagonal_(i);
    dense(i + 1, i) = off_diagonal_(i);
  }
  return dense;
}

Eigen::VectorXd TridiagonalMatrix::multiply(const Eigen::VectorXd& v) const {
  if (v.size() != size()) {
    throw Error(ErrorKind::kDimensionMismatch, "tridiagonal multiply: size mismatch");
  }
  Eigen::VectorXd out = diagonal_.cwiseProduct(v);
  const Eigen::Index n = size();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    out(i) += off_diagonal_(i) * v(i + 1);
    out(i + 1) += off_diagonal_(i) * v(i);
  }
  return out;
}

double TridiagonalMatrix::quadratic_form(const Eigen::VectorXd& v) const {
  return v.dot(multiply(v));
}

TridiagonalMatrix ar1_precision(Eigen::Index n_points, double rho) {
  if (n_points < 1) {
    throw Error(ErrorKind::kInvalidArgument, "ar1_precision requires n_points >= 1");
  }
  if (!(std::abs(rho) < 1.0)) {
    std::ostringstream msg;
    msg << "ar1_precision requires |rho| < 1, got " << rho
        << "; the precision does not exist at the boundary";
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  if (n_points == 1) {
    return TridiagonalMatrix(Eigen::VectorXd::Ones(1), Eigen::VectorXd(0));
  }
  const double scale = 1.0 / ((1.0 - rho) * (1.0 + rho));
  Eigen::VectorXd diagonal =
      Eigen::VectorXd::Constant(n_points, (1.0 + rho * rho) * scale);
  diagonal(0) = scale;
  diagonal(n_points - 1) = scale;
  Eigen::VectorXd off = Eigen::VectorXd::Constant(n_points - 1, -rho * scale);
  return TridiagonalMatrix(std::move(diagonal), std::move(off));
}

}  // namespace strongcorr
