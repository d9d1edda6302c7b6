#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "strongcorr/gls.hpp"
#include "strongcorr/sampling.hpp"
#include "support/expect_error.hpp"
#include "support/oracles.hpp"

using namespace strongcorr;

namespace {

double dense_inverse_variance(const std::vector<double>& taus, double rho) {
  return oracle::ar1_quadratic_form(taus, rho);
}

double sum_squares(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

// Fitted once on the unit-slope and constant profiles at delta = 1; the
// observed coefficient is 0.0278.
constexpr double kAsymptoticGapConstant = 0.03;

}  // namespace

TEST(SnrProfile, LinearIntegrals) {
  const SnrProfile p = SnrProfile::linear(1.0, 1.0);
  EXPECT_DOUBLE_EQ(p.integral_tau_squared(), 7.0 / 3.0);
  EXPECT_DOUBLE_EQ(p.integral_tau_prime_squared(), 1.0);
  EXPECT_DOUBLE_EQ(p.boundary_sum(), 5.0);
  EXPECT_DOUBLE_EQ(p.tau(0.5), 1.5);
  EXPECT_DOUBLE_EQ(p.tau_prime(0.3), 1.0);
}

TEST(SnrProfile, NormalizedEndsAtOne) {
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    const SnrProfile p = SnrProfile::normalized_linear(alpha);
    EXPECT_NEAR(p.tau(1.0), 1.0, 1e-15);
    EXPECT_NEAR(p.tau(0.0), 1.0 / (1.0 + alpha), 1e-15);
  }
}

TEST(SnrProfile, TabulatedMatchesLinear) {
  std::vector<double> values;
  for (int i = 0; i <= 64; ++i) values.push_back(1.0 + i / 64.0);
  const SnrProfile p = SnrProfile::tabulated(values);
  EXPECT_NEAR(p.integral_tau_squared(), 7.0 / 3.0, 1e-6);
  EXPECT_NEAR(p.integral_tau_prime_squared(), 1.0, 1e-6);
  EXPECT_NEAR(p.tau(0.37), 1.37, 1e-10);
  EXPECT_NEAR(delta_at_max_variance(p), std::sqrt(7.0 / 3.0), 1e-5);
}

TEST(SnrProfile, Errors) {
  EXPECT_ERROR_KIND(SnrProfile::linear(0.0, 1.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(SnrProfile::linear(1.0, -1.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(SnrProfile::normalized_linear(-2.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(SnrProfile::tabulated({1, 1, 1, 1}), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(SnrProfile::tabulated({1, 1, -1, 1, 1}), ErrorKind::kInvalidArgument);
}

TEST(SamplingPlan, LocationsAndRho) {
  const SamplingPlan plan(4, 0.5, SnrProfile::linear(1.0, 1.0));
  EXPECT_EQ(plan.measurement_count(), 5);
  const std::vector<double> x = plan.locations();
  ASSERT_EQ(x.size(), 5u);
  EXPECT_EQ(x.front(), 0.0);
  EXPECT_EQ(x.back(), 1.0);
  EXPECT_DOUBLE_EQ(x[2], 0.5);
  EXPECT_DOUBLE_EQ(plan.rho(), std::exp(-0.5));
  EXPECT_DOUBLE_EQ(plan.taus()[3], 1.75);
  EXPECT_ERROR_KIND(SamplingPlan(0, 0.5, SnrProfile::linear(1.0, 0.0)), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(SamplingPlan(4, 0.0, SnrProfile::linear(1.0, 0.0)), ErrorKind::kInvalidArgument);
}

TEST(InverseVarianceExact, UncorrelatedSum) {
  const std::vector<double> taus = {1.0, 1.5, 0.7, 2.0};
  EXPECT_DOUBLE_EQ(ar1_inverse_variance(taus, 0.0), sum_squares(taus));
  const SamplingPlan tiny(6, 1e-6, SnrProfile::linear(1.0, 1.0));
  EXPECT_NEAR(inverse_variance_exact(tiny), sum_squares(tiny.taus()), 1e-12 * sum_squares(tiny.taus()));
}

TEST(InverseVarianceExact, ConstantProfileApproachesContinuumValue) {
  const SnrProfile flat = SnrProfile::linear(1.0, 0.0);
  for (double delta : {0.2, 1.0, 5.0}) {
    const double v = 1.0 / inverse_variance_exact(SamplingPlan(100000, delta, flat));
    EXPECT_NEAR(v, 2.0 * delta / (2.0 * delta + 1.0), 1e-6) << delta;
  }
}

TEST(InverseVarianceExact, MatchesDenseQuadraticForm) {
  const SamplingPlan plan(4, 0.5, SnrProfile::linear(1.0, 1.0));
  const double dense = dense_inverse_variance(plan.taus(), plan.rho());
  EXPECT_LT(oracle::relative(inverse_variance_exact(plan), dense), 1e-12);
  const TridiagonalMatrix p = ar1_precision(5, plan.rho());
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(plan.taus().data(), 5);
  EXPECT_LT(oracle::relative(inverse_variance_exact(plan), p.quadratic_form(t)), 1e-12);
}

TEST(InverseVarianceExact, ThreeTermIdentityOnRandomTaus) {
  oracle::Random rng(25);
  for (int trial = 0; trial < 200; ++trial) {
    const int count = rng.integer(1, 65);
    std::vector<double> taus(static_cast<std::size_t>(count));
    for (double& t : taus) t = rng.uniform(0.05, 5.0);
    const double rho = rng.uniform(1e-6, 1.0 - 1e-6);
    EXPECT_LT(oracle::relative(ar1_inverse_variance(taus, rho), dense_inverse_variance(taus, rho)), 1e-11)
        << "count=" << count << " rho=" << rho;
  }
}

TEST(InverseVarianceExact, OverflowRegime) {
  const SamplingPlan plan(1000, 1e13, SnrProfile::linear(1.0, 1.0));
  try {
    inverse_variance_exact(plan);
    FAIL() << "expected outside-regime error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOutsideRegime);
    EXPECT_NE(std::string(e.what()).find("limiting_variance"), std::string::npos);
  }
  EXPECT_DOUBLE_EQ(variance_of_mean(plan.profile(), 1e13, 1000), limiting_variance(plan.profile(), 1e13));
}

TEST(InverseVarianceExact, StrictlyPositive) {
  oracle::Random rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const SamplingPlan plan(rng.integer(1, 500), std::pow(10.0, rng.uniform(-3.0, 3.0)),
                            SnrProfile::linear(rng.uniform(0.1, 3.0), rng.uniform(-0.9, 3.0)));
    EXPECT_GT(inverse_variance_exact(plan), 0.0);
  }
}

TEST(InverseVarianceAsymptotic, ConstantProfile) {
  const SnrProfile flat = SnrProfile::linear(1.0, 0.0);
  for (double delta : {0.5, 1.0, 3.0}) {
    const AsymptoticInverseVariance a = inverse_variance_asymptotic(flat, delta, 100);
    EXPECT_DOUBLE_EQ(a.value, 1.0 / (2.0 * delta) + 1.0);
    EXPECT_NEAR(1.0 / a.value, 2.0 * delta / (2.0 * delta + 1.0), 1e-15);
  }
}

TEST(InverseVarianceAsymptotic, LinearProfileLeadingValue) {
  const SnrProfile p = SnrProfile::linear(1.0, 1.0);
  for (double delta : {0.5, 1.0, 2.0}) {
    EXPECT_NEAR(inverse_variance_asymptotic(p, delta, 1000).value,
                delta / 2.0 + 7.0 / (6.0 * delta) + 2.5, 1e-14);
  }
}

TEST(InverseVarianceAsymptotic, GapBoundedByFrozenConstant) {
  for (double alpha : {0.0, 1.0}) {
    const SnrProfile p = SnrProfile::linear(1.0, alpha);
    for (long n : {10L, 30L, 100L}) {
      const double exact = inverse_variance_exact(SamplingPlan(n, 1.0, p));
      const AsymptoticInverseVariance a = inverse_variance_asymptotic(p, 1.0, n);
      const double gap = std::abs(exact - a.value) / exact;
      EXPECT_LE(gap, kAsymptoticGapConstant / (n * n)) << "alpha=" << alpha << " n=" << n;
      EXPECT_LE(std::abs(exact - a.value), a.neglected);
    }
  }
}

TEST(InverseVarianceAsymptotic, SecondOrderConvergence) {
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    const SnrProfile p = SnrProfile::linear(1.0, alpha);
    for (double delta : {0.3, 1.0, 4.0}) {
      for (long n : {20L, 80L, 320L}) {
        auto gap = [&](long count) {
          const double exact = inverse_variance_exact(SamplingPlan(count, delta, p));
          return std::abs(exact - inverse_variance_asymptotic(p, delta, count).value) / exact;
        };
        EXPECT_GE(gap(n) / gap(2 * n), 3.5) << "alpha=" << alpha << " delta=" << delta << " n=" << n;
      }
    }
  }
}

TEST(InverseVarianceAsymptotic, RejectsShortCorrelation) {
  EXPECT_ERROR_KIND(inverse_variance_asymptotic(SnrProfile::linear(1.0, 1.0), 0.1, 10),
                    ErrorKind::kOutsideRegime);
}

TEST(VarianceOfMean, NoFirstOrderTerm) {
  for (double alpha : {0.0, 1.0}) {
    const SnrProfile p = SnrProfile::linear(1.0, alpha);
    const double delta = 1.0;
    double c = 0.0;
    for (long n = 8; n <= 16; ++n) {
      c = std::max(c, std::abs(variance_of_mean(p, delta, 2 * n) - variance_of_mean(p, delta, n)) *
                          static_cast<double>(n * n));
    }
    for (long n = 32; n <= 8192; n *= 2) {
      const double step = std::abs(variance_of_mean(p, delta, 2 * n) - variance_of_mean(p, delta, n));
      EXPECT_LE(step * static_cast<double>(n * n), 1.01 * c) << "alpha=" << alpha << " n=" << n;
    }
  }
}

TEST(VarianceOfMean, UncorrelatedDecay) {
  const SnrProfile flat = SnrProfile::linear(1.0, 0.0);
  for (long n : {1L, 2L, 7L, 50L}) {
    EXPECT_NEAR(variance_of_mean(flat, 0.0, n), 1.0 / static_cast<double>(n + 1), 1e-15);
  }
  EXPECT_ERROR_KIND(variance_of_mean(flat, 0.0, 0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(variance_of_mean(flat, -1.0, 4), ErrorKind::kInvalidArgument);
}

TEST(LimitingVariance, ConstantProfileIdentity) {
  for (double tau0 : {0.3, 1.0, 7.0}) {
    const SnrProfile flat = SnrProfile::linear(tau0, 0.0);
    for (double delta : {1e-3, 0.2, 1.0, 40.0, 1e6}) {
      const double expected = 2.0 * delta / (2.0 * delta + 1.0) / (tau0 * tau0);
      EXPECT_LT(oracle::relative(limiting_variance(flat, delta), expected), 1e-14);
    }
  }
}

TEST(LimitingVariance, Asymptotes) {
  const SnrProfile flat = SnrProfile::linear(1.0, 0.0);
  EXPECT_NEAR(limiting_variance(flat, 1e9), 1.0, 1e-9);
  const SnrProfile p = SnrProfile::linear(1.0, 1.0);
  EXPECT_NEAR(limiting_variance(p, 1e6) * 1e6, 2.0, 1e-4);
  EXPECT_LT(limiting_variance(p, 1e-9), 1e-8);
  EXPECT_ERROR_KIND(limiting_variance(p, 0.0), ErrorKind::kInvalidArgument);
}

TEST(LimitingVariance, ApproachedFromAbove) {
  const SnrProfile p = SnrProfile::linear(1.0, 1.0);
  const double limit = limiting_variance(p, 1.0);
  double previous = INFINITY;
  for (long n = 2; n <= 4096; n *= 2) {
    const double v = variance_of_mean(p, 1.0, n);
    EXPECT_GT(v, limit);
    EXPECT_LT(v, previous);
    previous = v;
  }
  EXPECT_NEAR(previous, limit, 1e-6);
}

TEST(DeltaAtMax, Examples) {
  EXPECT_NEAR(delta_at_max_variance(SnrProfile::linear(1.0, 1.0)), std::sqrt(7.0 / 3.0), 1e-15);
  EXPECT_ERROR_KIND(delta_at_max_variance(SnrProfile::linear(2.0, 0.0)), ErrorKind::kPrecondition);
  const SnrProfile p = SnrProfile::linear(1.0, 0.7);
  EXPECT_NEAR(delta_at_max_variance(p.scaled(13.0)), delta_at_max_variance(p), 1e-14);
}

TEST(DeltaAtMax, GridSearchBrackets) {
  for (double alpha : {0.5, 1.0, 2.0}) {
    const SnrProfile p = SnrProfile::linear(1.0, alpha);
    const double step = 1e-3;
    double best = 0.0;
    double best_value = -1.0;
    for (double delta = step; delta < 20.0; delta += step) {
      const double v = limiting_variance(p, delta);
      if (v > best_value) {
        best_value = v;
        best = delta;
      }
    }
    EXPECT_NEAR(best, delta_at_max_variance(p), step) << alpha;
  }
}

TEST(AsymptoticKernels, Values) {
  const KernelPair one = asymptotic_kernels(1.0);
  const double e = std::exp(-1.0);
  EXPECT_NEAR(one.f, (1.0 - e) / (1.0 + e), 1e-15);
  EXPECT_NEAR(one.g, e / (1.0 - e * e), 1e-15);
  EXPECT_NEAR(one.f, 0.46212, 5e-6);
  EXPECT_NEAR(one.g, 0.425459, 5e-7);

  const KernelPair small = asymptotic_kernels(1e-6);
  EXPECT_NEAR(small.f, 0.5, 1e-10);
  EXPECT_NEAR(small.g, 0.5, 1e-10);
}

TEST(AsymptoticKernels, SeriesMatchesDirectAtSwitch) {
  const double x = 1e-4;
  const KernelPair series = asymptotic_kernels(std::nextafter(x, 0.0));
  const double e = std::exp(-x);
  EXPECT_NEAR(series.f, -std::expm1(-x) / (x * (1.0 + e)), 1e-12);
  EXPECT_NEAR(series.g, x * e / -std::expm1(-2.0 * x), 1e-12);
  const KernelPair direct = asymptotic_kernels(x);
  EXPECT_NEAR(series.f, direct.f, 1e-12);
  EXPECT_NEAR(series.g, direct.g, 1e-12);
}

TEST(AsymptoticKernels, QuadraticApproachToHalf) {
  for (double x : {1e-1, 1e-2, 1e-3}) {
    const KernelPair k = asymptotic_kernels(x);
    EXPECT_NEAR((0.5 - k.f) / (x * x), 1.0 / 24.0, 0.01);
    EXPECT_NEAR((0.5 - k.g) / (x * x), 1.0 / 12.0, 0.01);
    EXPECT_GT(k.f, 0.0);
    EXPECT_GT(k.g, 0.0);
  }
  EXPECT_ERROR_KIND(asymptotic_kernels(0.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(asymptotic_kernels(-1.0), ErrorKind::kInvalidArgument);
}

TEST(Curves, VsDeltaShape) {
  const SnrProfile p = SnrProfile::normalized_linear(1.0);
  std::vector<double> deltas;
  for (int i = 0; i <= 200; ++i) deltas.push_back(std::pow(10.0, -2.0 + 4.0 * i / 200.0));
  const std::vector<long> ns = {2, 7};
  const CurveTable t = variance_curve_vs_delta(p, deltas, ns);
  EXPECT_EQ(t.axis_name, "delta");
  ASSERT_EQ(t.series.size(), 3u);
  EXPECT_EQ(t.series[0].name, "n=2");
  EXPECT_EQ(t.series[2].name, "limit");
  const std::vector<double>& limit = t.series[2].values;
  const auto peak = std::max_element(limit.begin(), limit.end()) - limit.begin();
  EXPECT_NEAR(std::log10(deltas[static_cast<std::size_t>(peak)]),
              std::log10(delta_at_max_variance(p)), 0.02);
  const double slope = std::log(limit[200] / limit[150]) / std::log(deltas[200] / deltas[150]);
  EXPECT_LT(slope, -0.8);
  EXPECT_GT(slope, -1.0);
  EXPECT_GT(limit[200] * deltas[200], limit[150] * deltas[150]);
  for (std::size_t i = 100; i < deltas.size(); ++i) {
    EXPECT_GE(t.series[0].values[i], t.series[1].values[i]);
    EXPECT_GE(t.series[1].values[i], limit[i]);
  }
}

TEST(Curves, VsDeltaFlatProfileMonotone) {
  const SnrProfile p = SnrProfile::normalized_linear(0.0);
  std::vector<double> deltas;
  for (int i = 0; i <= 100; ++i) deltas.push_back(std::pow(10.0, -2.0 + 4.0 * i / 100.0));
  const CurveTable t = variance_curve_vs_delta(p, deltas, std::vector<long>{2, 7});
  for (const CurveSeries& s : t.series) {
    for (std::size_t i = 1; i < s.values.size(); ++i) EXPECT_GE(s.values[i], s.values[i - 1]) << s.name;
    EXPECT_GT(s.values.back(), s.values.front());
    EXPECT_NEAR(s.values.back(), 200.0 / 201.0, 1e-4);
  }
}

TEST(Curves, VsDeltaSmallDeltaIsUncorrelated) {
  const SnrProfile p = SnrProfile::linear(1.0, 1.0);
  const std::vector<double> deltas = {1e-6};
  const CurveTable t = variance_curve_vs_delta(p, deltas, std::vector<long>{7}, false);
  ASSERT_EQ(t.series.size(), 1u);
  const SamplingPlan plan(7, 1e-6, p);
  EXPECT_NEAR(t.series[0].values[0] * sum_squares(plan.taus()), 1.0, 1e-12);
  EXPECT_ERROR_KIND(variance_curve_vs_delta(p, std::vector<double>{0.0}, std::vector<long>{2}),
                    ErrorKind::kInvalidArgument);
}

TEST(Curves, VsNFig4Behaviour) {
  const SnrProfile flat = SnrProfile::linear(1.0, 0.0);
  std::vector<long> ns(50);
  std::iota(ns.begin(), ns.end(), 1L);
  const CurveTable zero = variance_curve_vs_n(flat, 0.0, ns);
  EXPECT_EQ(zero.axis_name, "n");
  EXPECT_EQ(zero.series[0].name, "delta=0");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    EXPECT_NEAR(zero.series[0].values[i], 1.0 / static_cast<double>(ns[i] + 1), 1e-15);
  }

  const SnrProfile p = SnrProfile::normalized_linear(1.0);
  const CurveTable short_corr = variance_curve_vs_n(p, 0.2, ns);
  const std::vector<double>& v = short_corr.series[0].values;
  EXPECT_GT(v[0] - v[4], 5.0 * (v[9] - v[49]));
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LT(v[i], v[i - 1]);
  EXPECT_ERROR_KIND(variance_curve_vs_n(p, -0.1, ns), ErrorKind::kInvalidArgument);
}
