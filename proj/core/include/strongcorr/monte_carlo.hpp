#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "strongcorr/gls.hpp"

namespace strongcorr {

/// Counter-based random stream keyed by (seed, stream index). Each Monte
/// Carlo trial draws from its own stream, so the values of a trial never
/// depend on how trials are split between threads.
///
/// Normals use the inverse-CDF transform, Phi^-1(u) = -sqrt(2) erfc^-1(2u),
/// applied to 53-bit uniforms in the open interval (0, 1).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct McConfig {
  std::size_t trials = 100000;
  std::uint64_t seed = 0;
  Eigen::VectorXd beta_true;  // empty means zeros
  std::size_t parallel_chunks = 1;
};

enum class EstimatorMode {
  kBlue,       // full-rank weighted least squares
  kNoiseFree,  // exact constraints from the null space of a singular Sigma
};

const char* to_string(EstimatorMode mode);

struct McReport {
  EstimatorMode mode = EstimatorMode::kBlue;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd beta_true;
  Eigen::VectorXd empirical_mean;
  Eigen::MatrixXd empirical_covariance;
  Eigen::MatrixXd analytic_covariance;
  /// max_ij |C_ij - V_ij| / se_ij with se_ij^2 = (V_ii V_jj + V_ij^2)/(T - 1).
  double max_standardized_deviation = 0.0;
  /// max_i |mean_i - beta_i| / sqrt(V_ii / T).
  double max_standardized_bias = 0.0;
  Eigen::Index negative_weight_count = 0;
  /// Fraction of trials whose estimate left [min y, max y]; m = 1 only.
  std::optional<double> outside_range_fraction;

  bool passes(double threshold = 4.0) const {
    return max_standardized_deviation <= threshold &&
           max_standardized_bias <= threshold;
  }
};

/// L with L L^t = Sigma: Cholesky when it succeeds, otherwise the spectral
/// square root with eigenvalues below 1e-12 lambda_1 clamped to zero.
Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& sigma);

/// count x n matrix whose rows are independent N(0, Sigma) draws.
Eigen::MatrixXd sample_correlated_noise(const Eigen::MatrixXd& sigma,
                                        std::size_t count, std::uint64_t seed,
                                        std::size_t parallel_chunks = 1);

/// Runs the estimator on `config.trials` synthetic data sets y = X beta + eta
/// and compares the spread of the estimates with the analytic covariance
/// (or with `expected_covariance` when given). Needs trials >= 100.
McReport empirical_estimator_covariance(
    const DesignMatrix& x, const Eigen::MatrixXd& sigma, const McConfig& config,
    EstimatorMode mode = EstimatorMode::kBlue,
    const std::optional<Eigen::MatrixXd>& expected_covariance = std::nullopt);

/// One sampled two-measurement experiment in the negative-weight regime.
struct PeelleRecord {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
  double estimate = 0.0;
  bool below_range = false;
  bool above_range = false;

  bool outside_range() const { return below_range || above_range; }
};

/// Requires sigma1 > sigma2 > 0 and sigma2/sigma1 < rho < 1.
PeelleRecord peelle_demo(double sigma1, double sigma2, double rho, double mu,
                         std::uint64_t seed);

}  // namespace strongcorr
