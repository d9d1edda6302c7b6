#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "strongcorr/correlation.hpp"
#include "strongcorr/gls.hpp"
#include "strongcorr/subspace.hpp"
#include "support/expect_error.hpp"
#include "support/oracles.hpp"

using namespace strongcorr;

namespace {

Eigen::MatrixXd rank_one_sigma(const Eigen::VectorXd& s, const SignVector& e) {
  return assemble_covariance(CovarianceModel(s, rank_one_limit(e)));
}

Eigen::VectorXd random_sigmas(oracle::Random& rng, int n) {
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = rng.uniform(0.5, 2.0);
  return s;
}

double trace_along_ar1(const Eigen::MatrixXd& x, const Eigen::VectorXd& s, double rho) {
  const Eigen::MatrixXd sigma = oracle::covariance(s, oracle::ar1(static_cast<int>(s.size()), rho));
  return estimator_covariance(DesignMatrix(x), sigma).trace();
}

}  // namespace

TEST(SpectralDecompose, RankOneLimit) {
  const SpectralDecomposition d =
      spectral_decompose(rank_one_sigma(Eigen::Vector2d(1.0, 2.0), SignVector::all_positive(2)));
  EXPECT_NEAR(d.eigenvalues(0), 5.0, 1e-14);
  EXPECT_NEAR(d.eigenvalues(1), 0.0, 1e-14);
  const Eigen::Vector2d v1 = Eigen::Vector2d(1.0, 2.0) / std::sqrt(5.0);
  EXPECT_LT((d.leading_vector() - v1).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SpectralDecompose, Identity) {
  const SpectralDecomposition d = spectral_decompose(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_EQ(d.eigenvalues, Eigen::VectorXd::Ones(4));
  EXPECT_FALSE(d.clamped);
}

TEST(SpectralDecompose, TwoPointFullCorrelation) {
  const Eigen::MatrixXd sigma = rank_one_sigma(Eigen::Vector2d(1.0, 0.5), SignVector::all_positive(2));
  const SpectralDecomposition d = spectral_decompose(sigma);
  EXPECT_NEAR(d.eigenvalues(0), 1.25, 1e-15);
  EXPECT_GE(d.eigenvalues(1), 0.0);
  EXPECT_NEAR(d.eigenvalues(1), 0.0, 1e-15);
}

TEST(SpectralDecompose, Invariants) {
  oracle::Random rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.integer(1, 12);
    Eigen::MatrixXd sigma;
    if (trial % 3 == 0) {
      std::vector<int> e(static_cast<std::size_t>(n));
      for (int& v : e) v = rng.uniform(0, 1) < 0.5 ? -1 : 1;
      sigma = rank_one_sigma(random_sigmas(rng, n), SignVector(e));
    } else {
      sigma = oracle::covariance(random_sigmas(rng, n), oracle::ar1(n, rng.uniform(-0.9999, 0.9999)));
    }
    const SpectralDecomposition d = spectral_decompose(sigma);
    const Eigen::MatrixXd& q = d.eigenvectors;
    EXPECT_LT((q.transpose() * q - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(oracle::relative(q * d.eigenvalues.asDiagonal() * q.transpose(), sigma), 1e-10);
    for (int i = 0; i + 1 < n; ++i) EXPECT_GE(d.eigenvalues(i), d.eigenvalues(i + 1));
    EXPECT_GE(d.eigenvalues.minCoeff(), 0.0);
  }
}

TEST(SpectralDecompose, Errors) {
  Eigen::Matrix2d asym;
  asym << 1.0, 0.5, 0.5 + 1e-6, 1.0;
  EXPECT_ERROR_KIND(spectral_decompose(asym), ErrorKind::kNotSymmetric);
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_ERROR_KIND(spectral_decompose(indefinite), ErrorKind::kIndefinite);
  EXPECT_ERROR_KIND(spectral_decompose(Eigen::MatrixXd(2, 3)), ErrorKind::kDimensionMismatch);
}

TEST(SpectralDecompose, ClampsRoundOffNegatives) {
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Ones();
  sigma(2, 2) -= 1e-13;  // smallest eigenvalue ~ -3e-14 after mixing
  sigma(0, 1) += 1e-13;
  sigma(1, 0) += 1e-13;
  const SpectralDecomposition d = spectral_decompose(sigma);
  EXPECT_GE(d.eigenvalues.minCoeff(), 0.0);
  EXPECT_TRUE(d.clamped);
}

TEST(V1Membership, Examples) {
  const DesignMatrix ones = DesignMatrix::ones(2);
  const MembershipResult in = v1_membership(ones, Eigen::Vector2d(1.0, 1.0).normalized());
  EXPECT_TRUE(in.member);
  EXPECT_NEAR(in.residual, 0.0, 1e-15);

  const Eigen::Vector2d v = Eigen::Vector2d(1.0, 2.0) / std::sqrt(5.0);
  const MembershipResult out = v1_membership(ones, v);
  EXPECT_FALSE(out.member);
  // distance from span{(1,1)}: |v1 - v2| / sqrt(2)
  EXPECT_NEAR(out.residual, std::abs(v(0) - v(1)) / std::sqrt(2.0), 1e-15);

  Eigen::MatrixXd x(3, 2);
  x << 0.6, 1.0, 0.0, 2.0, 0.8, -1.0;
  EXPECT_TRUE(v1_membership(DesignMatrix(x), x.col(0)).member);
}

TEST(V1Membership, MatchesNormalEquationsOracle) {
  oracle::Random rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.integer(2, 9);
    const int m = rng.integer(1, n - 1);
    const Eigen::MatrixXd x = rng.matrix(n, m);
    const Eigen::VectorXd v = rng.matrix(n, 1).normalized();
    EXPECT_NEAR(v1_membership(DesignMatrix(x), v).residual, oracle::projection_residual(x, v), 1e-12);
  }
}

TEST(V1Membership, Errors) {
  const Eigen::Vector2d v = Eigen::Vector2d(1.0, 1.0).normalized();
  EXPECT_ERROR_KIND(v1_membership(DesignMatrix::ones(2), v, 0.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(v1_membership(DesignMatrix::ones(2), v, -1.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(v1_membership(DesignMatrix::ones(2), Eigen::Vector2d(1.0, 1.0)),
                    ErrorKind::kInvalidArgument);
}

TEST(TransformToEigenbasis, IdentityIsNoOp) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 1, 1, 1, 2;
  const Eigen::Vector3d y(0.1, -0.4, 2.0);
  SpectralDecomposition d;
  d.eigenvalues = Eigen::Vector3d(3.0, 2.0, 1.0);
  d.eigenvectors = Eigen::Matrix3d::Identity();
  const TransformedSystem t = transform_to_eigenbasis(Observation(y), DesignMatrix(x), d);
  EXPECT_EQ(t.z, Eigen::VectorXd(y));
  EXPECT_EQ(t.x_tilde, x);
  EXPECT_EQ(t.lambda, d.eigenvalues);
}

TEST(TransformToEigenbasis, NoiseFreeRowsAreExact) {
  const Eigen::Vector3d s(1.0, 2.0, 0.5);
  const SignVector e({1, -1, 1});
  const SpectralDecomposition d = spectral_decompose(rank_one_sigma(s, e));
  Eigen::MatrixXd x(3, 2);
  x << 1, 0.5, 1, -1, 1, 2;
  const Eigen::Vector2d beta(0.7, -1.3);
  const Eigen::VectorXd v1 = e.as_vector().cwiseProduct(s) / s.norm();
  const Eigen::VectorXd y = x * beta + 3.7 * v1;
  const TransformedSystem t = transform_to_eigenbasis(Observation(y), DesignMatrix(x), d);
  for (int j = 1; j < 3; ++j) {
    EXPECT_NEAR(t.z(j), d.eigenvectors.col(j).dot(x * beta), 1e-13);
    EXPECT_NEAR(t.lambda(j), 0.0, 1e-14);
  }
}

TEST(TransformToEigenbasis, IsometryAndRecovery) {
  oracle::Random rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.integer(2, 10);
    const Eigen::MatrixXd q = rng.orthogonal(n);
    Eigen::VectorXd lambda(n);
    for (int i = 0; i < n; ++i) lambda(i) = rng.uniform(0.1, 5.0);
    const Eigen::MatrixXd sigma = q * lambda.asDiagonal() * q.transpose();
    const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
    const SpectralDecomposition d = spectral_decompose(sym);
    const Eigen::VectorXd y = rng.matrix(n, 1);
    const TransformedSystem t =
        transform_to_eigenbasis(Observation(y), DesignMatrix(rng.matrix(n, 1)), d);
    EXPECT_NEAR(t.z.norm(), y.norm(), 1e-12 * y.norm());
    EXPECT_LT(oracle::relative(recover_observation(t, d), y), 1e-10);
  }
}

TEST(TransformToEigenbasis, PreservesBlue) {
  oracle::Random rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.integer(2, 9);
    const int m = rng.integer(1, n);
    const Eigen::MatrixXd x = rng.matrix(n, m);
    const Eigen::MatrixXd sigma =
        oracle::covariance(random_sigmas(rng, n), oracle::ar1(n, rng.uniform(-0.95, 0.95)));
    const Observation y(rng.matrix(n, 1));
    const TransformedSystem t = transform_to_eigenbasis(y, DesignMatrix(x), spectral_decompose(sigma));
    const Eigen::MatrixXd p = t.lambda.cwiseInverse().asDiagonal();
    const Eigen::VectorXd beta = (t.x_tilde.transpose() * p * t.x_tilde)
                                     .ldlt()
                                     .solve(t.x_tilde.transpose() * p * t.z);
    EXPECT_LT(oracle::relative(beta, blue_fit(y, DesignMatrix(x), sigma).beta_hat), 1e-8);
  }
}

TEST(TransformToEigenbasis, DimensionMismatch) {
  const SpectralDecomposition d = spectral_decompose(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_ERROR_KIND(transform_to_eigenbasis(Observation(Eigen::Vector2d::Ones()),
                                            DesignMatrix::ones(2), d),
                    ErrorKind::kDimensionMismatch);
}

TEST(ReducedDesign, Examples) {
  oracle::Random rng(4);
  const Eigen::MatrixXd x = rng.matrix(5, 3);
  const SpectralDecomposition d =
      spectral_decompose(oracle::covariance(random_sigmas(rng, 5), oracle::ar1(5, 0.5)));
  const ReducedDesign full = reduced_design(DesignMatrix(x), d, 0);
  EXPECT_EQ(full.rank, 3);
  EXPECT_EQ(full.matrix.rows(), 5);

  const SpectralDecomposition unequal =
      spectral_decompose(rank_one_sigma(Eigen::Vector2d(1.0, 0.5), SignVector::all_positive(2)));
  EXPECT_EQ(reduced_design(DesignMatrix::ones(2), unequal, 1).rank, 1);

  const SpectralDecomposition equal =
      spectral_decompose(rank_one_sigma(Eigen::Vector2d(1.0, 1.0), SignVector::all_positive(2)));
  EXPECT_EQ(reduced_design(DesignMatrix::ones(2), equal, 1).rank, 0);

  EXPECT_ERROR_KIND(reduced_design(DesignMatrix::ones(2), equal, 2), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(reduced_design(DesignMatrix::ones(2), equal, -1), ErrorKind::kInvalidArgument);
}

TEST(Reparametrize, SingleColumn) {
  const Eigen::Vector2d v1 = Eigen::Vector2d(1.0, 1.0).normalized();
  const Eigen::MatrixXd w = reparametrize(DesignMatrix::ones(2), v1);
  ASSERT_EQ(w.rows(), 1);
  EXPECT_NEAR(w(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_LT(((Eigen::MatrixXd::Ones(2, 1) * w).col(0) - v1).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Reparametrize, GramSchmidtShape) {
  const Eigen::Vector3d v1 = Eigen::Vector3d(1.0, 2.0, 2.0) / 3.0;
  Eigen::MatrixXd x(3, 2);
  x.col(0) = v1;
  x.col(1) = Eigen::Vector3d(0.5, -1.0, 3.0);
  const Eigen::MatrixXd w = reparametrize(DesignMatrix(x), v1);
  // one Gram-Schmidt step: W = [[1, -v1.x2], [0, 1]]
  EXPECT_NEAR(w(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(w(1, 0), 0.0, 1e-14);
  EXPECT_NEAR(w(0, 1), -v1.dot(x.col(1)), 1e-14);
  EXPECT_NEAR(w(1, 1), 1.0, 1e-14);
  const Eigen::MatrixXd xw = x * w;
  EXPECT_LT((xw.col(0) - v1).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(xw.col(1).dot(v1), 0.0, 1e-10);
}

TEST(Reparametrize, RandomDesignsInvertible) {
  oracle::Random rng(44);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = rng.integer(3, 8);
    const int m = rng.integer(1, n - 1);
    Eigen::MatrixXd x = rng.matrix(n, m);
    const Eigen::VectorXd coeffs = rng.matrix(m, 1);
    const Eigen::VectorXd v1 = (x * coeffs).normalized();
    const Eigen::MatrixXd w = reparametrize(DesignMatrix(x), v1);
    const Eigen::MatrixXd xw = x * w;
    EXPECT_LT((xw.col(0) - v1).cwiseAbs().maxCoeff(), 1e-10);
    for (int j = 1; j < m; ++j) EXPECT_NEAR(xw.col(j).dot(v1), 0.0, 1e-10);
    const Eigen::MatrixXd inverse = w.fullPivLu().inverse();
    EXPECT_LT((w * inverse - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((inverse * w - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Reparametrize, RejectsNonMember) {
  EXPECT_ERROR_KIND(reparametrize(DesignMatrix::ones(2), Eigen::Vector2d(1.0, 2.0).normalized()),
                    ErrorKind::kPrecondition);
}

TEST(LimitPrediction, UnequalPairVanishes) {
  const LimitReport r = limit_variance_prediction(DesignMatrix::ones(2), Eigen::Vector2d(1.0, 0.5),
                                                  SignVector::all_positive(2));
  EXPECT_FALSE(r.v1_in_column_space);
  EXPECT_EQ(r.exact_dimension, 1);
  EXPECT_EQ(r.noisy_dimension, 0);
  EXPECT_EQ(r.predicted_total_variance, 0.0);
  EXPECT_EQ(r.reduced_rank, 1);
  EXPECT_EQ(r.covariance_limit_rank, 1);
}

TEST(LimitPrediction, EqualPairKeepsOneNoisyCombination) {
  const LimitReport r = limit_variance_prediction(DesignMatrix::ones(2), Eigen::Vector2d(1.0, 1.0),
                                                  SignVector::all_positive(2));
  EXPECT_TRUE(r.v1_in_column_space);
  EXPECT_EQ(r.exact_dimension, 0);
  EXPECT_EQ(r.noisy_dimension, 1);
  EXPECT_DOUBLE_EQ(r.predicted_total_variance, 2.0);
  EXPECT_EQ(r.reduced_rank, 0);
  // gamma = beta / |v1 coefficient|: V(mu) = V(gamma) c^2 with X c = v1.
  const double c = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(r.predicted_total_variance * c * c, two_point_mean_variance(1.0, 1.0, 1.0), 1e-15);
}

TEST(LimitPrediction, ThreePointMeanDecaysMonotonically) {
  const Eigen::Vector3d s(1.0, 2.0, 3.0);
  const LimitReport r =
      limit_variance_prediction(DesignMatrix::ones(3), s, SignVector::all_positive(3));
  EXPECT_FALSE(r.v1_in_column_space);
  EXPECT_EQ(r.noisy_dimension, 0);
  double previous = INFINITY;
  for (int k = 2; k <= 8; ++k) {
    const double v = trace_along_ar1(Eigen::MatrixXd::Ones(3, 1), s, 1.0 - std::pow(10.0, -k));
    EXPECT_LT(v, previous) << k;
    previous = v;
  }
  EXPECT_LT(previous, 1e-6);
}

TEST(LimitPrediction, Errors) {
  EXPECT_ERROR_KIND(limit_variance_prediction(DesignMatrix::ones(1), Eigen::VectorXd::Ones(1),
                                              SignVector::all_positive(1)),
                    ErrorKind::kUnderdetermined);
  Eigen::MatrixXd deficient(3, 2);
  deficient << 1, 2, 1, 2, 1, 2;
  EXPECT_ERROR_KIND(limit_variance_prediction(DesignMatrix(deficient), Eigen::Vector3d::Ones(),
                                              SignVector::all_positive(3)),
                    ErrorKind::kRankDeficient);
  EXPECT_ERROR_KIND(limit_variance_prediction(DesignMatrix::ones(3), Eigen::Vector2d::Ones(),
                                              SignVector::all_positive(3)),
                    ErrorKind::kDimensionMismatch);
}

TEST(LimitPrediction, DimensionsAddUpAndScale) {
  oracle::Random rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.integer(2, 8);
    const int m = rng.integer(1, n - 1);
    const Eigen::VectorXd s = random_sigmas(rng, n);
    Eigen::MatrixXd x = rng.matrix(n, m);
    if (trial % 2 == 0) x.col(0) = s;
    const SignVector e = SignVector::all_positive(n);
    const LimitReport r = limit_variance_prediction(DesignMatrix(x), s, e);
    EXPECT_EQ(r.exact_dimension + r.noisy_dimension, m);
    if (trial % 2 == 0) {
      EXPECT_TRUE(r.v1_in_column_space);
    }

    const double c = rng.uniform(0.1, 10.0);
    const LimitReport scaled = limit_variance_prediction(DesignMatrix(x), c * s, e);
    EXPECT_LT((scaled.v1 - r.v1).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(scaled.v1_in_column_space, r.v1_in_column_space);
    EXPECT_EQ(scaled.exact_dimension, r.exact_dimension);
    EXPECT_LT(oracle::relative(scaled.predicted_total_variance, c * c * r.predicted_total_variance),
              1e-13 + (r.predicted_total_variance == 0.0 ? INFINITY : 0.0));
  }
}

TEST(LimitDecay, TraceDecaysWhenV1OutsideColumnSpace) {
  oracle::Random rng(2024);
  int checked = 0;
  while (checked < 20) {
    const int n = rng.integer(2, 8);
    const int m = rng.integer(1, n - 1);
    const Eigen::MatrixXd x = rng.matrix(n, m);
    const Eigen::VectorXd s = random_sigmas(rng, n);
    const LimitReport r = limit_variance_prediction(DesignMatrix(x), s, SignVector::all_positive(n));
    if (r.v1_residual < 0.1) continue;
    ++checked;
    const double rho_half = std::pow(0.5, 1.0 / (n - 1));  // kappa = 0.5
    const double reference = trace_along_ar1(x, s, rho_half);
    const double at_k6 = trace_along_ar1(x, s, 1.0 - 1e-6);
    EXPECT_LT(at_k6, 1e-3 * reference) << "n=" << n << " m=" << m;
    EXPECT_EQ(r.noisy_dimension, 0);
  }
}

TEST(LimitDecay, ConverseKeepsVariance) {
  oracle::Random rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.integer(2, 8);
    const int m = rng.integer(1, n - 1);
    const Eigen::VectorXd s = random_sigmas(rng, n);
    Eigen::MatrixXd x = rng.matrix(n, m);
    x.col(0) = s / s.maxCoeff();
    const LimitReport r = limit_variance_prediction(DesignMatrix(x), s, SignVector::all_positive(n));
    ASSERT_TRUE(r.v1_in_column_space);
    EXPECT_GT(trace_along_ar1(x, s, 1.0 - 1e-6), 0.5 * s.array().square().minCoeff());
  }
}

TEST(SingularLimit, RankLawForBlockComposition) {
  // n = 5, blocks of rank 2 and 1, so r' = 3 and n - r' = 2 < m = 3.
  oracle::Random rng(91);
  const Eigen::MatrixXd x = rng.matrix(5, 3);
  const Eigen::VectorXd s = random_sigmas(rng, 5);
  const std::vector<CorrelationMatrix> blocks = {ar1_correlation(2, 0.3),
                                                 rank_one_limit(SignVector::all_positive(3))};
  const Eigen::MatrixXd sigma = assemble_covariance(CovarianceModel(s, block_correlation(blocks)));

  const LimitReport r = limit_variance_prediction(DesignMatrix(x), sigma);
  EXPECT_EQ(r.covariance_limit_rank, 3);
  EXPECT_EQ(r.exact_dimension, 2);
  EXPECT_EQ(r.noisy_dimension, 1);

  const NoiseFreeFit fit = noise_free_fit(DesignMatrix(x), sigma);
  EXPECT_EQ(fit.exact_dimension, 2);
  EXPECT_EQ(fit.covariance_rank, 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.covariance);
  const double top = eig.eigenvalues().maxCoeff();
  EXPECT_EQ((eig.eigenvalues().array() < 1e-8 * top).count(), 2);
  EXPECT_LT((fit.weights * x - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(oracle::relative(fit.weights * sigma * fit.weights.transpose(), fit.covariance), 1e-8);

  // The full-rank BLUE approaches the same covariance as block 2 saturates.
  const std::vector<CorrelationMatrix> near = {ar1_correlation(2, 0.3),
                                               ar1_correlation(3, 1.0 - 1e-9)};
  const Eigen::MatrixXd sigma_near =
      assemble_covariance(CovarianceModel(s, block_correlation(near)));
  EXPECT_LT(oracle::relative(estimator_covariance(DesignMatrix(x), sigma_near), fit.covariance), 1e-3);
}

TEST(SingularLimit, NoiseFreeFitRecoversBetaExactly) {
  const Eigen::Vector2d s(1.0, 0.5);
  const Eigen::MatrixXd sigma = rank_one_sigma(s, SignVector::all_positive(2));
  const NoiseFreeFit fit = noise_free_fit(DesignMatrix::ones(2), sigma);
  EXPECT_EQ(fit.exact_dimension, 1);
  EXPECT_NEAR(fit.covariance(0, 0), 0.0, 1e-300);
  for (double alpha : {-1.0, 0.3, 2.5}) {
    const Eigen::Vector2d y = Eigen::Vector2d::Constant(3.0) + alpha * s;
    EXPECT_NEAR((fit.weights * y)(0), 3.0, 1e-13);
    EXPECT_NEAR((fit.weights * y)(0), two_point_full_correlation_estimate(y(0), y(1), 1.0, 0.5),
                1e-13);
  }
}

TEST(SingularLimit, EqualPairFallsBackToNoisyFit) {
  const Eigen::MatrixXd sigma = rank_one_sigma(Eigen::Vector2d(1.0, 1.0), SignVector::all_positive(2));
  const NoiseFreeFit fit = noise_free_fit(DesignMatrix::ones(2), sigma);
  EXPECT_EQ(fit.exact_dimension, 0);
  EXPECT_NEAR(fit.covariance(0, 0), 1.0, 1e-14);
}
