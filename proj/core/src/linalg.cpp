#include "strongcorr/linalg.hpp"

#include <Eigen/SVD>

namespace strongcorr::linalg {

namespace {

Eigen::Index count_above(const Eigen::VectorXd& singular_values,
                         double cutoff) {
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > cutoff) ++rank;
  }
  return rank;
}

}  // namespace

double largest_singular_value(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& a, double reference,
                            double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return count_above(svd.singularValues(), rel_tol * reference);
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& a, double rel_tol) {
  return numerical_rank(a, largest_singular_value(a), rel_tol);
}

Eigen::MatrixXd column_basis(const Eigen::MatrixXd& a, double reference,
                             double rel_tol) {
  if (a.size() == 0) return Eigen::MatrixXd(a.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const Eigen::Index rank =
      count_above(svd.singularValues(), rel_tol * reference);
  return svd.matrixU().leftCols(rank);
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double reference,
                           double rel_tol) {
  const Eigen::Index cols = a.cols();
  if (a.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Index rank =
      count_above(svd.singularValues(), rel_tol * reference);
  return svd.matrixV().rightCols(cols - rank);
}

double relative_asymmetry(const Eigen::MatrixXd& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

bool all_finite(const Eigen::MatrixXd& a) { return a.allFinite(); }

}  // namespace strongcorr::linalg
