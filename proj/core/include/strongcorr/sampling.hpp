#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace strongcorr {

/// Signal-to-noise profile tau(s) = 1 / sigma(s) on [0, 1].
///
/// Two forms are supported: linear tau0 (1 + slope s), integrated
/// analytically, and tabulated values on an equispaced grid, interpolated by
/// a cubic B-spline and integrated with the composite trapezoid rule on
/// kQuadraturePanels panels. Both forms are smooth, so both may be used by
/// the asymptotic operations.
class SnrProfile {
 public:
  enum class Form { kLinear, kTabulated };

  static constexpr int kQuadraturePanels = 4096;

  static SnrProfile linear(double tau0, double slope);
  /// (1 + slope s) / (1 + slope), i.e. the linear form rescaled to tau(1) = 1.
  static SnrProfile normalized_linear(double slope);
  /// Values at s = i / (k - 1), i = 0 .. k - 1; needs k >= 5.
  static SnrProfile tabulated(std::vector<double> values);

  Form form() const noexcept { return form_; }
  double tau0() const noexcept { return tau0_; }
  double slope() const noexcept { return slope_; }

  double tau(double s) const;
  double tau_prime(double s) const;

  double integral_tau_squared() const noexcept { return int_tau_sq_; }
  double integral_tau_prime_squared() const noexcept { return int_tau_prime_sq_; }
  /// tau(0)^2 + tau(1)^2
  double boundary_sum() const;

  /// tau -> c tau.
  SnrProfile scaled(double factor) const;

 private:
  struct Spline;
  SnrProfile() = default;
  void integrate();

  Form form_ = Form::kLinear;
  double tau0_ = 1.0;
  double slope_ = 0.0;
  std::vector<double> table_;
  std::shared_ptr<const Spline> spline_;
  double int_tau_sq_ = 0.0;
  double int_tau_prime_sq_ = 0.0;
};

/// n intervals on [0, 1]: n + 1 measurements at x_i = i / n with
/// correlation exp(-|x_i - x_j| / delta), i.e. AR(1) with
/// rho = exp(-1 / (delta n)).
class SamplingPlan {
 public:
  SamplingPlan(long intervals, double delta, SnrProfile profile);

  long intervals() const noexcept { return intervals_; }
  long measurement_count() const noexcept { return intervals_ + 1; }
  double delta() const noexcept { return delta_; }
  const SnrProfile& profile() const noexcept { return profile_; }

  /// 1 / (delta n); rho = exp(-step).
  double correlation_step() const noexcept {
    return 1.0 / (delta_ * static_cast<double>(intervals_));
  }
  double rho() const;
  std::vector<double> locations() const;
  std::vector<double> taus() const;

 private:
  long intervals_;
  double delta_;
  SnrProfile profile_;
};

/// Three-term closed form of sum_ij (R^-1)_ij tau_i tau_j for the AR(1)
/// correlation with coefficient rho in [0, 1):
///   [(1-rho)^2 sum tau_i^2 + rho sum (tau_{i+1}-tau_i)^2
///    + rho (1-rho)(tau_0^2 + tau_last^2)] / (1 - rho^2)
double ar1_inverse_variance(std::span<const double> taus, double rho);

/// Exact inverse variance of the mean estimate for a sampling plan.
/// Throws Error(kOutsideRegime) when 1 / (delta n) < 1e-15, where rho
/// rounds to 1; limiting_variance is the correct value there.
double inverse_variance_exact(const SamplingPlan& plan);

struct AsymptoticInverseVariance {
  /// delta/2 int tau'^2 + 1/(2 delta) int tau^2 + (tau(0)^2 + tau(1)^2)/2
  double value = 0.0;
  /// Magnitude of the neglected terms: the bracket times (delta n)^-2 plus
  /// (delta + 1/delta) n^-2. A scale, not a rigorous bound.
  double neglected = 0.0;
};

/// Large-n expansion. Requires delta n > 1.
AsymptoticInverseVariance inverse_variance_asymptotic(const SnrProfile& profile,
                                                      double delta, long n);

/// n -> infinity variance,
///   2 delta / (int tau^2 + delta (tau(0)^2 + tau(1)^2) + delta^2 int tau'^2).
double limiting_variance(const SnrProfile& profile, double delta);

/// sqrt(int tau^2 / int tau'^2); throws for a constant profile.
double delta_at_max_variance(const SnrProfile& profile);

struct KernelPair {
  double f = 0.5;  // (1 - e^-x) / (x (1 + e^-x))
  double g = 0.5;  // x e^-x / (1 - e^-2x)
};

/// Below x = 1e-4 a four-term series replaces the direct formulas.
KernelPair asymptotic_kernels(double x);

/// Variance of the mean for n intervals. delta = 0 is the uncorrelated case;
/// in the rho -> 1 overflow regime the limiting variance is returned.
double variance_of_mean(const SnrProfile& profile, double delta, long n);

struct CurveSeries {
  std::string name;
  std::vector<double> values;
};

struct CurveTable {
  std::string axis_name;
  std::vector<double> axis;
  std::vector<CurveSeries> series;
};

/// One column per interval count, plus a "limit" column when requested.
CurveTable variance_curve_vs_delta(const SnrProfile& profile,
                                   std::span<const double> deltas,
                                   std::span<const long> n_values,
                                   bool include_limit = true);

/// One column for the given correlation length; delta = 0 allowed.
CurveTable variance_curve_vs_n(const SnrProfile& profile, double delta,
                               std::span<const long> n_values);

}  // namespace strongcorr
