#include "strongcorr/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "strongcorr/error.hpp"

namespace strongcorr::io {

namespace {

[[noreturn]] void field_error(std::string_view field, const std::string& what) {
  throw Error(ErrorKind::kParse,
              "field '" + std::string(field) + "': " + what);
}

bool scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

void emit(const Json& j, std::string& out, int indent, int depth) {
  switch (j.type()) {
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_number(v) : "null";
      return;
    }
    case Json::value_t::array:
    case Json::value_t::object:
      break;
    default:
      out += j.dump();
      return;
  }
  const bool is_array = j.is_array();
  const char open = is_array ? '[' : '{';
  const char close = is_array ? ']' : '}';
  if (j.empty()) {
    out += open;
    out += close;
    return;
  }
  // Arrays of scalars stay on one line so matrices read row by row.
  const bool flat = indent < 0 ||
                    (is_array && std::all_of(j.begin(), j.end(), scalar));
  const std::string pad(static_cast<std::size_t>(std::max(indent, 0) * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(std::max(indent, 0) * depth), ' ');
  out += open;
  bool first = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!first) out += flat ? ", " : ",";
    first = false;
    if (!flat) {
      out += '\n';
      out += pad;
    }
    if (!is_array) {
      out += Json(it.key()).dump();
      out += ": ";
    }
    emit(*it, out, indent, depth + 1);
  }
  if (!flat) {
    out += '\n';
    out += close_pad;
  }
  out += close;
}

double parse_number(std::string_view token, std::size_t line) {
  while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front()))) {
    token.remove_prefix(1);
  }
  while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) {
    token.remove_suffix(1);
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || end != token.data() + token.size()) {
    throw Error(ErrorKind::kParse, "CSV line " + std::to_string(line) +
                                       ": not a number: '" + std::string(token) + "'");
  }
  return value;
}

Eigen::VectorXd read_vector(const Json& j, std::string_view field) {
  if (!j.is_array()) field_error(field, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      field_error(field, "entry " + std::to_string(i) + " is not a number");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd read_matrix(const Json& j, std::string_view field) {
  if (!j.is_array() || j.empty()) field_error(field, "expected a non-empty nested array");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    field_error(field, "row 0 is not a non-empty array");
  }
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.size() != cols) {
      field_error(field, "row " + std::to_string(i) + " does not have " +
                             std::to_string(cols) + " entries");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number()) {
        field_error(field, "entry (" + std::to_string(i) + ", " + std::to_string(k) +
                               ") is not a number");
      }
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
  }
  return a;
}

double read_number(const Json& j, std::string_view field) {
  if (!j.is_number()) field_error(field, "expected a number");
  return j.get<double>();
}

const Json& require(const Json& obj, std::string_view field) {
  const auto it = obj.find(std::string(field));
  if (it == obj.end()) field_error(field, "missing");
  return *it;
}

void expect_length(Eigen::Index actual, Eigen::Index expected, std::string_view field,
                   std::string_view what) {
  if (actual != expected) {
    field_error(field, "length " + std::to_string(actual) + " does not match " +
                           std::string(what) + " " + std::to_string(expected));
  }
}

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t stop = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < stop; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                       std::chars_format::general, 17);
  (void)ec;
  return std::string(buf.data(), end);
}

std::string dump_json(const Json& value, int indent) {
  std::string out;
  emit(value, out, indent, 0);
  return out;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json matrix_rows(const Eigen::MatrixXd& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json matrix_to_json(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "matrix JSON form needs a square matrix");
  }
  Json j = Json::object();
  j["n"] = a.rows();
  j["matrix"] = matrix_rows(a);
  return j;
}

Eigen::MatrixXd matrix_from_json(const Json& value) {
  if (!value.is_object()) throw Error(ErrorKind::kParse, "matrix JSON must be an object");
  const Json& n_field = require(value, "n");
  if (!n_field.is_number_integer() || n_field.get<long long>() < 1) {
    field_error("n", "expected a positive integer");
  }
  Eigen::MatrixXd a = read_matrix(require(value, "matrix"), "matrix");
  const auto n = static_cast<Eigen::Index>(n_field.get<long long>());
  if (a.rows() != n || a.cols() != n) {
    field_error("matrix", "shape does not match n = " + std::to_string(n));
  }
  return a;
}

std::string matrix_to_csv(const Eigen::MatrixXd& a) {
  std::string out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (k > 0) out += ',';
      out += format_number(a(i, k));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd matrix_from_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(parse_number(line.substr(start, comma - start), line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::kParse, "CSV line " + std::to_string(line_no) +
                                         ": expected " +
                                         std::to_string(rows.front().size()) + " values");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::kParse, "CSV matrix is empty");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return a;
}

Json to_json(const CorrelationMatrix& r) { return matrix_to_json(r.matrix()); }

Json to_json(const BlueResult& result) {
  Json j = Json::object();
  j["beta_hat"] = vector_to_json(result.beta_hat);
  j["covariance"] = matrix_rows(result.covariance);
  j["weights"] = matrix_rows(result.weights);
  j["chi_squared"] = result.chi_squared;
  j["condition"] = {
      {"sigma_min_eigenvalue", result.condition.sigma_min_eigenvalue},
      {"sigma_max_eigenvalue", result.condition.sigma_max_eigenvalue},
      {"sigma_ratio", result.condition.sigma_ratio()},
      {"normal_min_eigenvalue", result.condition.normal_min_eigenvalue},
      {"normal_max_eigenvalue", result.condition.normal_max_eigenvalue},
  };
  return j;
}

Json to_json(const LimitReport& report) {
  Json j = Json::object();
  j["n"] = report.n;
  j["m"] = report.m;
  j["v1_in_column_space"] = report.v1_in_column_space;
  j["v1_residual"] = report.v1_residual;
  j["v1"] = vector_to_json(report.v1);
  j["exact_dimension"] = report.exact_dimension;
  j["noisy_dimension"] = report.noisy_dimension;
  j["predicted_total_variance"] = report.predicted_total_variance;
  j["reduced_rank"] = report.reduced_rank;
  j["covariance_limit_rank"] =
      report.covariance_limit_rank ? Json(*report.covariance_limit_rank) : Json();
  return j;
}

Json to_json(const McReport& report) {
  Json j = Json::object();
  j["mode"] = to_string(report.mode);
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["beta_true"] = vector_to_json(report.beta_true);
  j["empirical_mean"] = vector_to_json(report.empirical_mean);
  j["empirical_covariance"] = matrix_rows(report.empirical_covariance);
  j["analytic_covariance"] = matrix_rows(report.analytic_covariance);
  j["max_standardized_deviation"] = report.max_standardized_deviation;
  j["max_standardized_bias"] = report.max_standardized_bias;
  j["negative_weight_count"] = report.negative_weight_count;
  j["outside_range_fraction"] =
      report.outside_range_fraction ? Json(*report.outside_range_fraction) : Json();
  j["threshold"] = 4.0;
  j["pass"] = report.passes();
  return j;
}

Json to_json(const PeelleRecord& record) {
  return Json{{"sigma1", record.sigma1}, {"sigma2", record.sigma2},
              {"rho", record.rho},       {"mu", record.mu},
              {"w1", record.w1},         {"w2", record.w2},
              {"y1", record.y1},         {"y2", record.y2},
              {"estimate", record.estimate},
              {"below_range", record.below_range},
              {"above_range", record.above_range}};
}

Json to_json(const CurveTable& table) {
  Json j = Json::object();
  j["axis"] = table.axis_name;
  j["values"] = table.axis;
  Json series = Json::array();
  for (const CurveSeries& s : table.series) {
    series.push_back(Json{{"name", s.name}, {"values", s.values}});
  }
  j["series"] = std::move(series);
  return j;
}

std::string curve_to_csv(const CurveTable& table) {
  std::string out = table.axis_name;
  for (const CurveSeries& s : table.series) {
    out += ',';
    out += s.name;
  }
  out += '\n';
  for (std::size_t i = 0; i < table.axis.size(); ++i) {
    out += format_number(table.axis[i]);
    for (const CurveSeries& s : table.series) {
      out += ',';
      out += format_number(s.values.at(i));
    }
    out += '\n';
  }
  return out;
}

CovarianceModel Problem::covariance_model() const {
  return CovarianceModel(sigma, CorrelationMatrix(correlation));
}

Eigen::MatrixXd Problem::covariance() const {
  return assemble_covariance(covariance_model());
}

Problem parse_problem(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kParse, "malformed JSON at " + line_context(text, e.byte) +
                                       ": " + e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::kParse, "problem file must be a JSON object");

  static const std::set<std::string> known = {
      "design", "y", "sigma", "correlation", "signs", "sign_threshold",
      "beta_true", "expected_covariance"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (!known.contains(it.key())) field_error(it.key(), "unknown field");
  }

  Problem p;
  p.design = read_matrix(require(root, "design"), "design");
  p.y = read_vector(require(root, "y"), "y");
  const Eigen::Index n = p.y.size();
  if (n < 1) field_error("y", "must not be empty");
  if (p.design.rows() != n) {
    field_error("design", "has " + std::to_string(p.design.rows()) +
                              " rows but y has " + std::to_string(n) + " entries");
  }
  try {
    (void)DesignMatrix(p.design);
  } catch (const Error& e) {
    field_error("design", e.what());
  }
  if (!p.y.allFinite()) field_error("y", "entries must be finite");

  p.sigma = read_vector(require(root, "sigma"), "sigma");
  expect_length(p.sigma.size(), n, "sigma", "y length");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p.sigma(i) > 0.0) || !std::isfinite(p.sigma(i))) {
      field_error("sigma", "entry " + std::to_string(i) + " must be positive and finite");
    }
  }

  const Json& corr = require(root, "correlation");
  try {
    if (corr.is_array()) {
      p.correlation = read_matrix(corr, "correlation");
      if (p.correlation.rows() != n || p.correlation.cols() != n) {
        field_error("correlation", "must be " + std::to_string(n) + " x " +
                                       std::to_string(n));
      }
      p.correlation = CorrelationMatrix(p.correlation).matrix();
    } else if (corr.is_object()) {
      const Json& model = require(corr, "model");
      if (!model.is_string()) field_error("correlation.model", "expected a string");
      p.correlation_model = model.get<std::string>();
      if (p.correlation_model == "ar1") {
        const double rho = read_number(require(corr, "rho"), "correlation.rho");
        p.ar1_rho = rho;
        p.correlation = ar1_correlation(n, rho).matrix();
      } else if (p.correlation_model == "exp") {
        const double delta = read_number(require(corr, "delta"), "correlation.delta");
        const Eigen::VectorXd locations =
            read_vector(require(corr, "locations"), "correlation.locations");
        expect_length(locations.size(), n, "correlation.locations", "y length");
        p.correlation = exponential_correlation(
                            std::span<const double>(locations.data(),
                                                    static_cast<std::size_t>(n)),
                            delta)
                            .matrix();
      } else {
        field_error("correlation.model",
                    "unknown model '" + p.correlation_model + "' (expected ar1 or exp)");
      }
    } else {
      field_error("correlation", "expected a nested array or a model object");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kParse) throw;
    field_error("correlation", e.what());
  }

  if (const auto it = root.find("signs"); it != root.end()) {
    if (!it->is_array()) field_error("signs", "expected an array of +1 / -1");
    std::vector<int> signs;
    for (const Json& s : *it) {
      if (!s.is_number_integer()) field_error("signs", "entries must be +1 or -1");
      signs.push_back(s.get<int>());
    }
    expect_length(static_cast<Eigen::Index>(signs.size()), n, "signs", "y length");
    try {
      p.signs = SignVector(std::move(signs));
    } catch (const Error& e) {
      field_error("signs", e.what());
    }
  }
  if (const auto it = root.find("sign_threshold"); it != root.end()) {
    p.sign_threshold = read_number(*it, "sign_threshold");
    if (!(p.sign_threshold > 0.0) || !(p.sign_threshold < 1.0)) {
      field_error("sign_threshold", "must lie in (0, 1)");
    }
  }
  const Eigen::Index m = p.design.cols();
  if (const auto it = root.find("beta_true"); it != root.end()) {
    p.beta_true = read_vector(*it, "beta_true");
    expect_length(p.beta_true->size(), m, "beta_true", "design columns");
  }
  if (const auto it = root.find("expected_covariance"); it != root.end()) {
    p.expected_covariance = read_matrix(*it, "expected_covariance");
    if (p.expected_covariance->rows() != m || p.expected_covariance->cols() != m) {
      field_error("expected_covariance", "must be " + std::to_string(m) + " x " +
                                             std::to_string(m));
    }
  }
  return p;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kParse, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Problem load_problem(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_problem(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace strongcorr::io
