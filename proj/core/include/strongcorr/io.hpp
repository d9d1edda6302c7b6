#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "strongcorr/correlation.hpp"
#include "strongcorr/gls.hpp"
#include "strongcorr/monte_carlo.hpp"
#include "strongcorr/sampling.hpp"
#include "strongcorr/subspace.hpp"

namespace strongcorr::io {

using Json = nlohmann::ordered_json;

/// 17 significant digits, shortest "%g"-style layout. Round-trips exactly.
std::string format_number(double value);

/// Serializes like Json::dump but writes every floating value through
/// format_number. Non-finite values become null.
std::string dump_json(const Json& value, int indent = 2);

Json vector_to_json(const Eigen::VectorXd& v);
/// Row-major nested arrays.
Json matrix_rows(const Eigen::MatrixXd& a);

/// {"n": rows, "matrix": [[...], ...]}; square matrices only.
Json matrix_to_json(const Eigen::MatrixXd& a);
Eigen::MatrixXd matrix_from_json(const Json& value);

/// Headerless, one row per line, comma separated.
std::string matrix_to_csv(const Eigen::MatrixXd& a);
Eigen::MatrixXd matrix_from_csv(std::string_view text);

Json to_json(const CorrelationMatrix& r);
Json to_json(const BlueResult& result);
Json to_json(const LimitReport& report);
Json to_json(const McReport& report);
Json to_json(const PeelleRecord& record);
Json to_json(const CurveTable& table);

/// Header row (axis name, then series names), one row per axis value.
std::string curve_to_csv(const CurveTable& table);

/// Problem input file.
///
///   design       n x m nested array
///   y            length n
///   sigma        length n, positive
///   correlation  n x n nested array, {"model": "ar1", "rho": r} or
///                {"model": "exp", "delta": d, "locations": [...]}
///   signs        optional, length n of +1 / -1
///   sign_threshold     optional, default 0.5
///   beta_true          optional, length m (Monte Carlo mean)
///   expected_covariance optional, m x m (overrides the analytic covariance
///                       in Monte Carlo validation)
struct Problem {
  Eigen::MatrixXd design;
  Eigen::VectorXd y;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd correlation;
  std::string correlation_model = "matrix";  // "matrix", "ar1" or "exp"
  std::optional<double> ar1_rho;
  std::optional<SignVector> signs;
  double sign_threshold = kDefaultSignThreshold;
  std::optional<Eigen::VectorXd> beta_true;
  std::optional<Eigen::MatrixXd> expected_covariance;

  Eigen::Index size() const noexcept { return y.size(); }
  CovarianceModel covariance_model() const;
  Eigen::MatrixXd covariance() const;
};

/// Throws Error(kParse) naming the offending field, or the line and column
/// of a JSON syntax error.
Problem parse_problem(std::string_view text);
Problem load_problem(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace strongcorr::io
