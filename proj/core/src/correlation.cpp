#include "strongcorr/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "strongcorr/error.hpp"

namespace strongcorr {

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(Eigen::MatrixXd entries)
    : entries_(std::move(entries)) {
  const Eigen::Index n = entries_.rows();
  if (n < 1 || entries_.cols() != n) {
    fail(ErrorKind::kDimensionMismatch,
         "correlation matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) {
    fail(ErrorKind::kInvalidArgument, "correlation matrix has non-finite entries");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (entries_(i, i) != 1.0) {
      std::ostringstream msg;
      msg << "correlation diagonal entry (" << i << ", " << i << ") is "
          << entries_(i, i) << ", expected 1";
      fail(ErrorKind::kInvalidArgument, msg.str());
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (entries_(i, j) != entries_(j, i)) {
        std::ostringstream msg;
        msg << "correlation matrix is not symmetric at (" << i << ", " << j << ")";
        fail(ErrorKind::kNotSymmetric, msg.str());
      }
      if (std::abs(entries_(i, j)) > 1.0) {
        std::ostringstream msg;
        msg << "correlation coefficient (" << i << ", " << j << ") = "
            << entries_(i, j) << " lies outside [-1, 1]";
        fail(ErrorKind::kInvalidArgument, msg.str());
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(entries_,
                                                        Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  min_eigenvalue_ = lambda(0);
  max_eigenvalue_ = lambda(n - 1);
  if (min_eigenvalue_ < -kPsdFloor * max_eigenvalue_) {
    std::ostringstream msg;
    msg << "correlation matrix is indefinite: smallest eigenvalue "
        << min_eigenvalue_ << " below floor " << -kPsdFloor * max_eigenvalue_;
    fail(ErrorKind::kIndefinite, msg.str());
  }
  rank_ = (lambda.array() > kRankTolerance * max_eigenvalue_).count();
}

CorrelationMatrix CorrelationMatrix::identity(Eigen::Index n) {
  return CorrelationMatrix(Eigen::MatrixXd::Identity(n, n));
}

SignVector::SignVector(std::vector<int> signs) : signs_(std::move(signs)) {
  if (signs_.empty()) fail(ErrorKind::kInvalidArgument, "sign vector is empty");
  for (std::size_t i = 0; i < signs_.size(); ++i) {
    if (signs_[i] != 1 && signs_[i] != -1) {
      std::ostringstream msg;
      msg << "sign vector entry " << i << " is " << signs_[i]
          << ", expected +1 or -1";
      fail(ErrorKind::kInvalidArgument, msg.str());
    }
  }
}

SignVector SignVector::all_positive(Eigen::Index n) {
  return SignVector(std::vector<int>(static_cast<std::size_t>(n), 1));
}

SignVector SignVector::alternating(Eigen::Index n) {
  std::vector<int> signs(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < signs.size(); ++j) signs[j] = (j % 2 == 0) ? 1 : -1;
  return SignVector(std::move(signs));
}

Eigen::VectorXd SignVector::as_vector() const {
  Eigen::VectorXd v(size());
  for (Eigen::Index i = 0; i < size(); ++i) v(i) = (*this)[i];
  return v;
}

CovarianceModel::CovarianceModel(Eigen::VectorXd sigmas,
                                 CorrelationMatrix correlation)
    : sigmas_(std::move(sigmas)), correlation_(std::move(correlation)) {
  if (sigmas_.size() != correlation_.size()) {
    std::ostringstream msg;
    msg << "deviation vector has length " << sigmas_.size()
        << " but correlation matrix is " << correlation_.size() << "x"
        << correlation_.size();
    fail(ErrorKind::kDimensionMismatch, msg.str());
  }
  for (Eigen::Index i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_(i) > 0.0) || !std::isfinite(sigmas_(i))) {
      std::ostringstream msg;
      msg << "deviation sigma[" << i << "] = " << sigmas_(i)
          << " must be finite and > 0";
      fail(ErrorKind::kInvalidArgument, msg.str());
    }
  }
}

CovarianceModel CovarianceModel::from_covariance(const Eigen::MatrixXd& sigma) {
  const Eigen::Index n = sigma.rows();
  if (n < 1 || sigma.cols() != n) {
    fail(ErrorKind::kDimensionMismatch, "covariance matrix must be square");
  }
  Eigen::VectorXd deviations(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sigma(i, i) > 0.0)) {
      fail(ErrorKind::kInvalidArgument, "covariance diagonal must be > 0");
    }
    deviations(i) = std::sqrt(sigma(i, i));
  }
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double value = 0.5 * (sigma(i, j) + sigma(j, i)) /
                     (deviations(i) * deviations(j));
      // Round-off can push a perfectly correlated pair a few ulps past 1.
      value = std::clamp(value, -1.0, 1.0);
      rho(i, j) = value;
      rho(j, i) = value;
    }
  }
  return CovarianceModel(std::move(deviations), CorrelationMatrix(std::move(rho)));
}

CorrelationMatrix ar1_correlation(Eigen::Index n, double rho) {
  if (n < 1) fail(ErrorKind::kInvalidArgument, "ar1_correlation requires n >= 1");
  if (!(std::abs(rho) < 1.0)) {
    std::ostringstream msg;
    msg << "ar1_correlation requires |rho| < 1, got " << rho
        << "; use rank_one_limit for the boundary";
    fail(ErrorKind::kInvalidArgument, msg.str());
  }
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double value = std::pow(rho, static_cast<double>(j - i));
      r(i, j) = value;
      r(j, i) = value;
    }
  }
  return CorrelationMatrix(std::move(r));
}

CorrelationMatrix exponential_correlation(std::span<const double> locations,
                                          double delta) {
  if (locations.empty()) {
    fail(ErrorKind::kInvalidArgument, "exponential_correlation needs locations");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    std::ostringstream msg;
    msg << "correlation length delta must be finite and > 0, got " << delta;
    fail(ErrorKind::kInvalidArgument, msg.str());
  }
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (!std::isfinite(locations[i])) {
      std::ostringstream msg;
      msg << "location " << i << " is not finite";
      fail(ErrorKind::kInvalidArgument, msg.str());
    }
  }
  const auto n = static_cast<Eigen::Index>(locations.size());
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double distance = std::abs(locations[static_cast<std::size_t>(i)] -
                                       locations[static_cast<std::size_t>(j)]);
      const double value = std::exp(-distance / delta);
      r(i, j) = value;
      r(j, i) = value;
    }
  }
  return CorrelationMatrix(std::move(r));
}

CorrelationMatrix rank_one_limit(const SignVector& signs) {
  const Eigen::VectorXd e = signs.as_vector();
  return CorrelationMatrix(e * e.transpose());
}

CorrelationMatrix block_correlation(std::span<const CorrelationMatrix> blocks) {
  if (blocks.empty()) fail(ErrorKind::kInvalidArgument, "block list is empty");
  Eigen::Index total = 0;
  for (const auto& block : blocks) total += block.size();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(total, total);
  Eigen::Index offset = 0;
  for (const auto& block : blocks) {
    r.block(offset, offset, block.size(), block.size()) = block.matrix();
    offset += block.size();
  }
  return CorrelationMatrix(std::move(r));
}

double kappa(const CorrelationMatrix& r) {
  double result = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    for (Eigen::Index j = i + 1; j < r.size(); ++j) {
      result = std::max(result, 1.0 - std::abs(r(i, j)));
    }
  }
  return result;
}

SignVector sign_vector(const CorrelationMatrix& r, double sign_threshold) {
  const Eigen::Index n = r.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!(std::abs(r(i, j)) > sign_threshold)) {
        std::ostringstream msg;
        msg << "sign of correlation (" << i << ", " << j << ") = " << r(i, j)
            << " is indeterminate: |rho| <= sign threshold " << sign_threshold;
        throw SignError(ErrorKind::kSignIndeterminate, msg.str(), i, j);
      }
    }
  }
  std::vector<int> signs(static_cast<std::size_t>(n), 1);
  for (Eigen::Index j = 1; j < n; ++j) {
    signs[static_cast<std::size_t>(j)] = r(0, j) > 0.0 ? 1 : -1;
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int expected =
          signs[static_cast<std::size_t>(i)] * signs[static_cast<std::size_t>(j)];
      const int actual = r(i, j) > 0.0 ? 1 : -1;
      if (actual != expected) {
        std::ostringstream msg;
        msg << "correlation signs are inconsistent at (" << i << ", " << j
            << "): sign(rho_ij) = " << actual << " but e_i e_j = " << expected;
        throw SignError(ErrorKind::kSignInconsistent, msg.str(), i, j);
      }
    }
  }
  return SignVector(std::move(signs));
}

Eigen::MatrixXd assemble_covariance(const CovarianceModel& model) {
  const Eigen::VectorXd& s = model.sigmas();
  const Eigen::MatrixXd& r = model.correlation().matrix();
  const Eigen::Index n = model.size();
  Eigen::MatrixXd sigma(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma(i, i) = s(i) * s(i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double value = (s(i) * s(j)) * r(i, j);
      sigma(i, j) = value;
      sigma(j, i) = value;
    }
  }
  return sigma;
}

}  // namespace strongcorr
