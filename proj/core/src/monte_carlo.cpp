#include "strongcorr/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/erf.hpp>

#include "strongcorr/error.hpp"
#include "strongcorr/subspace.hpp"

namespace strongcorr {

namespace {

constexpr double kSamplingClamp = 1e-12;
constexpr std::size_t kMinCovarianceTrials = 100;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Runs body(begin, end) over [0, count) split into contiguous chunks.
template <class Body>
void for_chunks(std::size_t count, std::size_t chunks, Body body) {
  chunks = std::clamp<std::size_t>(chunks, 1, std::max<std::size_t>(count, 1));
  if (chunks == 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(chunks);
  const std::size_t step = (count + chunks - 1) / chunks;
  for (std::size_t begin = 0; begin < count; begin += step) {
    const std::size_t end = std::min(count, begin + step);
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
}

void fill_noise(const Eigen::MatrixXd& factor, std::uint64_t seed,
                std::size_t trial, Eigen::Ref<Eigen::VectorXd> out,
                Eigen::VectorXd& scratch) {
  CounterRng rng(seed, trial);
  for (Eigen::Index k = 0; k < scratch.size(); ++k) scratch(k) = rng.normal();
  out.noalias() = factor * scratch;
}

double standardized(double difference, double standard_error) {
  if (standard_error > 0.0) return std::abs(difference) / standard_error;
  return std::abs(difference) <= 1e-12 ? 0.0
                                       : std::numeric_limits<double>::infinity();
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream ^ 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::next_u64() {
  return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
}

double CounterRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform());
}

const char* to_string(EstimatorMode mode) {
  return mode == EstimatorMode::kBlue ? "blue" : "noise_free";
}

Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().allFinite()) {
    return llt.matrixL();
  }
  SpectralDecomposition spectrum = spectral_decompose(sigma);
  const double cutoff = kSamplingClamp * spectrum.eigenvalues(0);
  Eigen::VectorXd roots = spectrum.eigenvalues;
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    roots(i) = roots(i) > cutoff ? std::sqrt(roots(i)) : 0.0;
  }
  return spectrum.eigenvectors * roots.asDiagonal();
}

Eigen::MatrixXd sample_correlated_noise(const Eigen::MatrixXd& sigma,
                                        std::size_t count, std::uint64_t seed,
                                        std::size_t parallel_chunks) {
  if (sigma.rows() < 1 || sigma.rows() != sigma.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "covariance must be square");
  }
  const Eigen::MatrixXd factor = noise_factor(sigma);
  const Eigen::Index n = sigma.rows();
  // Column-major n x count so each trial writes a contiguous column.
  Eigen::MatrixXd draws(n, static_cast<Eigen::Index>(count));
  for_chunks(count, parallel_chunks, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd scratch(n);
    for (std::size_t t = begin; t < end; ++t) {
      fill_noise(factor, seed, t, draws.col(static_cast<Eigen::Index>(t)), scratch);
    }
  });
  return draws.transpose();
}

McReport empirical_estimator_covariance(
    const DesignMatrix& x, const Eigen::MatrixXd& sigma, const McConfig& config,
    EstimatorMode mode, const std::optional<Eigen::MatrixXd>& expected_covariance) {
  if (config.trials < kMinCovarianceTrials) {
    std::ostringstream msg;
    msg << "covariance validation needs at least " << kMinCovarianceTrials
        << " trials, got " << config.trials;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  const Eigen::VectorXd beta =
      config.beta_true.size() == 0 ? Eigen::VectorXd::Zero(m) : config.beta_true;
  if (beta.size() != m) {
    throw Error(ErrorKind::kDimensionMismatch, "beta_true length does not match m");
  }

  Eigen::MatrixXd weights;
  Eigen::MatrixXd analytic;
  if (mode == EstimatorMode::kBlue) {
    weights = estimator_weights(x, sigma);
    analytic = estimator_covariance(x, sigma);
  } else {
    NoiseFreeFit fit = noise_free_fit(x, sigma);
    weights = std::move(fit.weights);
    analytic = std::move(fit.covariance);
  }
  if (expected_covariance) {
    if (expected_covariance->rows() != m || expected_covariance->cols() != m) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "expected covariance must be m x m");
    }
    analytic = *expected_covariance;
  }

  const Eigen::MatrixXd factor = noise_factor(sigma);
  const Eigen::VectorXd mean_y = x.matrix() * beta;
  const auto trials = static_cast<Eigen::Index>(config.trials);
  Eigen::MatrixXd estimates(m, trials);
  std::vector<char> outside(config.trials, 0);

  for_chunks(config.trials, config.parallel_chunks,
             [&](std::size_t begin, std::size_t end) {
               Eigen::VectorXd scratch(n);
               Eigen::VectorXd y(n);
               for (std::size_t t = begin; t < end; ++t) {
                 fill_noise(factor, config.seed, t, y, scratch);
                 y += mean_y;
                 const auto col = static_cast<Eigen::Index>(t);
                 estimates.col(col).noalias() = weights * y;
                 if (m == 1) {
                   const double e = estimates(0, col);
                   outside[t] = e < y.minCoeff() || e > y.maxCoeff();
                 }
               }
             });

  McReport report;
  report.mode = mode;
  report.trials = config.trials;
  report.seed = config.seed;
  report.beta_true = beta;
  report.analytic_covariance = analytic;
  report.negative_weight_count = (weights.array() < 0.0).count();

  // Fixed-order reduction keeps the report independent of chunking.
  const double count = static_cast<double>(trials);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  for (Eigen::Index t = 0; t < trials; ++t) mean += estimates.col(t);
  mean /= count;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index t = 0; t < trials; ++t) {
    const Eigen::VectorXd d = estimates.col(t) - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= (count - 1.0);
  report.empirical_mean = mean;
  report.empirical_covariance = 0.5 * (cov + cov.transpose());

  for (Eigen::Index i = 0; i < m; ++i) {
    report.max_standardized_bias = std::max(
        report.max_standardized_bias,
        standardized(mean(i) - beta(i), std::sqrt(std::max(analytic(i, i), 0.0) / count)));
    for (Eigen::Index j = 0; j < m; ++j) {
      const double se = std::sqrt(
          std::max(analytic(i, i) * analytic(j, j) + analytic(i, j) * analytic(i, j), 0.0) /
          (count - 1.0));
      report.max_standardized_deviation =
          std::max(report.max_standardized_deviation,
                   standardized(report.empirical_covariance(i, j) - analytic(i, j), se));
    }
  }
  if (m == 1) {
    const auto hits = std::count(outside.begin(), outside.end(), 1);
    report.outside_range_fraction = static_cast<double>(hits) / count;
  }
  return report;
}

PeelleRecord peelle_demo(double sigma1, double sigma2, double rho, double mu,
                         std::uint64_t seed) {
  if (!(sigma2 > 0.0) || !(sigma1 > sigma2) || !std::isfinite(sigma1)) {
    std::ostringstream msg;
    msg << "negative-weight demonstration needs sigma1 > sigma2 > 0, got sigma1 = "
        << sigma1 << ", sigma2 = " << sigma2;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  const double threshold = sigma2 / sigma1;
  if (!(rho > threshold) || !(rho < 1.0)) {
    std::ostringstream msg;
    msg << "rho = " << rho << " is outside the negative-weight regime ("
        << threshold << ", 1): y1 receives negative weight only when rho > "
        << "sigma2/sigma1 = " << threshold;
    throw Error(ErrorKind::kPrecondition, msg.str());
  }

  Eigen::Matrix2d sigma;
  sigma << sigma1 * sigma1, rho * sigma1 * sigma2, rho * sigma1 * sigma2,
      sigma2 * sigma2;
  const Eigen::MatrixXd weights = estimator_weights(DesignMatrix::ones(2), sigma);
  const Eigen::MatrixXd noise = sample_correlated_noise(sigma, 1, seed);

  PeelleRecord record;
  record.sigma1 = sigma1;
  record.sigma2 = sigma2;
  record.rho = rho;
  record.mu = mu;
  record.w1 = weights(0, 0);
  record.w2 = weights(0, 1);
  record.y1 = mu + noise(0, 0);
  record.y2 = mu + noise(0, 1);
  record.estimate = record.w1 * record.y1 + record.w2 * record.y2;
  record.below_range = record.estimate < std::min(record.y1, record.y2);
  record.above_range = record.estimate > std::max(record.y1, record.y2);
  return record;
}

}  // namespace strongcorr
