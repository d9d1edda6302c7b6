#include "strongcorr/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "strongcorr/error.hpp"

namespace strongcorr {

struct SnrProfile::Spline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> interpolant;
};

namespace {

// Below this 1/(delta n), 1 - rho is lost to round-off.
constexpr double kOverflowStep = 1e-15;
constexpr double kSeriesSwitch = 1e-4;

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    std::ostringstream msg;
    msg << "correlation length delta must be finite and > 0, got " << delta;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
}

double uncorrelated_inverse_variance(const SnrProfile& profile, long n) {
  double sum = 0.0;
  for (long i = 0; i <= n; ++i) {
    const double t = profile.tau(static_cast<double>(i) / static_cast<double>(n));
    sum += t * t;
  }
  return sum;
}

// Three-term form with 1 - rho supplied separately so callers holding
// 1/(delta n) can pass -expm1(-x) instead of a cancelled difference.
double three_term(std::span<const double> taus, double rho, double one_minus_rho) {
  double sum_sq = 0.0;
  double sum_diff_sq = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    sum_sq += taus[i] * taus[i];
    if (i + 1 < taus.size()) {
      const double d = taus[i + 1] - taus[i];
      sum_diff_sq += d * d;
    }
  }
  if (taus.size() == 1) return sum_sq;
  const double boundary = taus.front() * taus.front() + taus.back() * taus.back();
  const double one_plus = 1.0 + rho;
  // [(1-r)^2 S + r D + r (1-r) B] / ((1-r)(1+r)), split to avoid 0/0.
  return (one_minus_rho * sum_sq + rho * boundary) / one_plus +
         rho * sum_diff_sq / (one_minus_rho * one_plus);
}

}  // namespace

SnrProfile SnrProfile::linear(double tau0, double slope) {
  if (!(tau0 > 0.0) || !std::isfinite(tau0) || !std::isfinite(slope)) {
    std::ostringstream msg;
    msg << "linear profile needs finite tau0 > 0, got tau0 = " << tau0
        << ", slope = " << slope;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  if (!(1.0 + slope > 0.0)) {
    std::ostringstream msg;
    msg << "linear profile tau0 (1 + slope s) must stay positive on [0, 1]; "
        << "slope = " << slope << " reaches zero";
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  SnrProfile profile;
  profile.form_ = Form::kLinear;
  profile.tau0_ = tau0;
  profile.slope_ = slope;
  profile.integrate();
  return profile;
}

SnrProfile SnrProfile::normalized_linear(double slope) {
  if (!(1.0 + slope > 0.0)) {
    std::ostringstream msg;
    msg << "normalized profile needs slope > -1, got " << slope;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  return linear(1.0 / (1.0 + slope), slope);
}

SnrProfile SnrProfile::tabulated(std::vector<double> values) {
  if (values.size() < 5) {
    throw Error(ErrorKind::kInvalidArgument,
                "tabulated profile needs at least 5 grid values");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "tabulated profile value " << i << " = " << values[i]
          << " must be finite and > 0";
      throw Error(ErrorKind::kInvalidArgument, msg.str());
    }
  }
  SnrProfile profile;
  profile.form_ = Form::kTabulated;
  profile.table_ = std::move(values);
  const double step = 1.0 / static_cast<double>(profile.table_.size() - 1);
  profile.spline_ = std::make_shared<const Spline>(
      Spline{boost::math::interpolators::cardinal_cubic_b_spline<double>(
          profile.table_.data(), profile.table_.size(), 0.0, step)});
  profile.tau0_ = profile.table_.front();
  profile.integrate();
  return profile;
}

double SnrProfile::tau(double s) const {
  if (form_ == Form::kLinear) return tau0_ * (1.0 + slope_ * s);
  return spline_->interpolant(std::clamp(s, 0.0, 1.0));
}

double SnrProfile::tau_prime(double s) const {
  if (form_ == Form::kLinear) return tau0_ * slope_;
  return spline_->interpolant.prime(std::clamp(s, 0.0, 1.0));
}

double SnrProfile::boundary_sum() const {
  const double a = tau(0.0);
  const double b = tau(1.0);
  return a * a + b * b;
}

SnrProfile SnrProfile::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::kInvalidArgument, "profile scale factor must be > 0");
  }
  if (form_ == Form::kLinear) return linear(tau0_ * factor, slope_);
  std::vector<double> values = table_;
  for (double& v : values) v *= factor;
  return tabulated(std::move(values));
}

void SnrProfile::integrate() {
  if (form_ == Form::kLinear) {
    const double t2 = tau0_ * tau0_;
    int_tau_sq_ = t2 * (1.0 + slope_ + slope_ * slope_ / 3.0);
    int_tau_prime_sq_ = t2 * slope_ * slope_;
    return;
  }
  const int panels = kQuadraturePanels;
  const double h = 1.0 / panels;
  double sum_sq = 0.0;
  double sum_prime_sq = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double s = i * h;
    const double t = tau(s);
    if (!(t > 0.0)) {
      std::ostringstream msg;
      msg << "interpolated profile is not positive at s = " << s;
      throw Error(ErrorKind::kInvalidArgument, msg.str());
    }
    const double tp = tau_prime(s);
    const double weight = (i == 0 || i == panels) ? 0.5 : 1.0;
    sum_sq += weight * t * t;
    sum_prime_sq += weight * tp * tp;
  }
  int_tau_sq_ = sum_sq * h;
  int_tau_prime_sq_ = sum_prime_sq * h;
}

SamplingPlan::SamplingPlan(long intervals, double delta, SnrProfile profile)
    : intervals_(intervals), delta_(delta), profile_(std::move(profile)) {
  if (intervals_ < 1) {
    std::ostringstream msg;
    msg << "sampling plan needs n >= 1 intervals, got " << intervals_;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  check_delta(delta_);
}

double SamplingPlan::rho() const { return std::exp(-correlation_step()); }

std::vector<double> SamplingPlan::locations() const {
  std::vector<double> x(static_cast<std::size_t>(measurement_count()));
  for (long i = 0; i <= intervals_; ++i) {
    x[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / static_cast<double>(intervals_);
  }
  return x;
}

std::vector<double> SamplingPlan::taus() const {
  std::vector<double> t = locations();
  for (double& value : t) value = profile_.tau(value);
  return t;
}

double ar1_inverse_variance(std::span<const double> taus, double rho) {
  if (taus.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "ar1_inverse_variance needs taus");
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    std::ostringstream msg;
    msg << "ar1_inverse_variance needs rho in [0, 1), got " << rho;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  return three_term(taus, rho, 1.0 - rho);
}

double inverse_variance_exact(const SamplingPlan& plan) {
  const double step = plan.correlation_step();
  if (step < kOverflowStep) {
    std::ostringstream msg;
    msg << "1/(delta n) = " << step
        << " is below 1e-15: rho rounds to 1; use limiting_variance instead";
    throw Error(ErrorKind::kOutsideRegime, msg.str());
  }
  const std::vector<double> taus = plan.taus();
  return three_term(taus, std::exp(-step), -std::expm1(-step));
}

AsymptoticInverseVariance inverse_variance_asymptotic(const SnrProfile& profile,
                                                      double delta, long n) {
  check_delta(delta);
  const double delta_n = delta * static_cast<double>(n);
  if (!(delta_n > 1.0)) {
    std::ostringstream msg;
    msg << "asymptotic expansion needs delta n > 1, got delta n = " << delta_n;
    throw Error(ErrorKind::kOutsideRegime, msg.str());
  }
  const double bracket = 0.5 * delta * profile.integral_tau_prime_squared() +
                         profile.integral_tau_squared() / (2.0 * delta);
  AsymptoticInverseVariance out;
  out.value = bracket + 0.5 * profile.boundary_sum();
  const double inv_n = 1.0 / static_cast<double>(n);
  out.neglected = bracket / (delta_n * delta_n) + (delta + 1.0 / delta) * inv_n * inv_n;
  return out;
}

double limiting_variance(const SnrProfile& profile, double delta) {
  check_delta(delta);
  return 2.0 * delta /
         (profile.integral_tau_squared() + delta * profile.boundary_sum() +
          delta * delta * profile.integral_tau_prime_squared());
}

double delta_at_max_variance(const SnrProfile& profile) {
  const double slope_energy = profile.integral_tau_prime_squared();
  if (!(slope_energy > 1e-14 * profile.integral_tau_squared())) {
    throw Error(ErrorKind::kPrecondition,
                "profile is constant (int tau'^2 = 0): the limiting variance "
                "increases monotonically in delta and has no interior maximum");
  }
  return std::sqrt(profile.integral_tau_squared() / slope_energy);
}

KernelPair asymptotic_kernels(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << "asymptotic kernels need finite x > 0, got " << x;
    throw Error(ErrorKind::kInvalidArgument, msg.str());
  }
  KernelPair out;
  if (x < kSeriesSwitch) {
    const double x2 = x * x;
    // tanh(x/2)/x and x/(2 sinh x), four terms each.
    out.f = 0.5 + x2 * (-1.0 / 24.0 + x2 * (1.0 / 240.0 - x2 * 17.0 / 40320.0));
    out.g = 0.5 * (1.0 + x2 * (-1.0 / 6.0 + x2 * (7.0 / 360.0 - x2 * 31.0 / 15120.0)));
    return out;
  }
  const double e = std::exp(-x);
  out.f = -std::expm1(-x) / (x * (1.0 + e));
  out.g = x * e / -std::expm1(-2.0 * x);
  return out;
}

double variance_of_mean(const SnrProfile& profile, double delta, long n) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "n must be >= 1");
  if (delta == 0.0) return 1.0 / uncorrelated_inverse_variance(profile, n);
  check_delta(delta);
  const SamplingPlan plan(n, delta, profile);
  if (plan.correlation_step() < kOverflowStep) {
    return limiting_variance(profile, delta);
  }
  return 1.0 / inverse_variance_exact(plan);
}

CurveTable variance_curve_vs_delta(const SnrProfile& profile,
                                   std::span<const double> deltas,
                                   std::span<const long> n_values,
                                   bool include_limit) {
  for (double delta : deltas) check_delta(delta);
  CurveTable table;
  table.axis_name = "delta";
  table.axis.assign(deltas.begin(), deltas.end());
  for (long n : n_values) {
    CurveSeries series{"n=" + std::to_string(n), {}};
    series.values.reserve(deltas.size());
    for (double delta : deltas) series.values.push_back(variance_of_mean(profile, delta, n));
    table.series.push_back(std::move(series));
  }
  if (include_limit) {
    CurveSeries series{"limit", {}};
    series.values.reserve(deltas.size());
    for (double delta : deltas) series.values.push_back(limiting_variance(profile, delta));
    table.series.push_back(std::move(series));
  }
  return table;
}

CurveTable variance_curve_vs_n(const SnrProfile& profile, double delta,
                               std::span<const long> n_values) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::kInvalidArgument, "delta must be finite and >= 0");
  }
  CurveTable table;
  table.axis_name = "n";
  CurveSeries series{"delta=" + format_number(delta), {}};
  for (long n : n_values) {
    table.axis.push_back(static_cast<double>(n));
    series.values.push_back(variance_of_mean(profile, delta, n));
  }
  table.series.push_back(std::move(series));
  return table;
}

}  // namespace strongcorr
