#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "strongcorr/correlation.hpp"
#include "strongcorr/error.hpp"
#include "strongcorr/gls.hpp"
#include "strongcorr/io.hpp"
#include "strongcorr/monte_carlo.hpp"
#include "strongcorr/sampling.hpp"
#include "strongcorr/subspace.hpp"
#include "strongcorr/version.hpp"

namespace strongcorr::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

const std::vector<double> kFig1Sigma2 = {0.5, 0.75, 0.95, 1.0, 1.05, 1.25, 1.5};
const std::vector<double> kFig4Deltas = {0.0, 0.2, 0.5, 1.0};

struct Common {
  std::string out;
  std::string format;
  std::uint64_t seed = 1;
  std::size_t trials = 100000;
  bool no_normalize = false;
};

struct Fig1Args {
  double sigma1 = 1.0;
  std::vector<double> sigma2 = kFig1Sigma2;
  int rho_points = 201;
};

struct DeltaGridArgs {
  double alpha = 1.0;
  std::vector<long> n_values = {2, 7};
  double delta_min = 0.01;
  double delta_max = 100.0;
  int delta_points = 201;
};

struct Fig4Args {
  double alpha = 1.0;
  std::vector<double> deltas = kFig4Deltas;
  long n_max = 50;
};

struct ProblemArgs {
  std::string path;
  std::string mode = "auto";
  std::size_t threads = 0;
};

// Everything needed to write a payload and its manifest.
struct Invocation {
  std::string command;
  std::vector<std::string> argv;
  Json parameters = Json::object();
  std::vector<fs::path> inputs;
};

std::string shortest(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

Json error_json(const Error& e) {
  Json j = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  if (const auto* ill = dynamic_cast<const IllConditionedError*>(&e)) {
    j["smallest_eigenvalue"] = ill->smallest_eigenvalue();
    j["largest_eigenvalue"] = ill->largest_eigenvalue();
    j["floor"] = ill->floor();
  }
  if (const auto* sign = dynamic_cast<const SignError*>(&e)) {
    j["row"] = sign->row();
    j["col"] = sign->col();
  }
  return j;
}

SnrProfile make_profile(double alpha, bool no_normalize) {
  return no_normalize ? SnrProfile::linear(1.0, alpha)
                      : SnrProfile::normalized_linear(alpha);
}

std::string resolve_format(const Common& common, const std::string& fallback,
                           bool csv_allowed) {
  const std::string format = common.format.empty() ? fallback : common.format;
  if (format != "csv" && format != "json") {
    throw Error(ErrorKind::kInvalidArgument, "--format must be csv or json");
  }
  if (format == "csv" && !csv_allowed) {
    throw Error(ErrorKind::kInvalidArgument, "this command only writes json");
  }
  return format;
}

std::string render(const CurveTable& table, const std::string& format) {
  return format == "csv" ? io::curve_to_csv(table) : io::dump_json(io::to_json(table)) + "\n";
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::kInvalidArgument, "cannot write '" + path.string() + "'");
  file << bytes;
  if (!file.flush()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot write '" + path.string() + "'");
  }
}

void emit(const Invocation& inv, const std::string& payload, const Common& common,
          std::ostream& out, std::ostream& err) {
  const bool to_stdout = common.out.empty() || common.out == "-";
  Json manifest = Json::object();
  manifest["tool"] = "strongcorr";
  manifest["version"] = kVersion;
  manifest["command"] = inv.command;
  manifest["argv"] = inv.argv;
  manifest["parameters"] = inv.parameters;
  Json inputs = Json::array();
  for (const fs::path& p : inv.inputs) {
    inputs.push_back({{"path", p.string()}, {"sha256", sha256_hex(io::read_file(p))}});
  }
  manifest["inputs"] = std::move(inputs);
  manifest["outputs"] = Json::array(
      {{{"path", to_stdout ? "-" : common.out},
        {"sha256", sha256_hex(payload)},
        {"bytes", payload.size()}}});
  const std::string manifest_text = io::dump_json(manifest) + "\n";
  if (to_stdout) {
    out << payload;
    err << manifest_text;
  } else {
    write_file(common.out, payload);
    write_file(common.out + ".manifest.json", manifest_text);
  }
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double span = static_cast<double>(points - 1);
  for (int k = 0; k < points; ++k) {
    grid[static_cast<std::size_t>(k)] =
        (lo * (span - k) + hi * k) / span;
  }
  return grid;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> grid = linear_grid(std::log(lo), std::log(hi), points);
  for (double& g : grid) g = std::exp(g);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

int cmd_fig1(const Fig1Args& a, const Common& common, Invocation inv, std::ostream& out,
             std::ostream& err) {
  const std::string format = resolve_format(common, "csv", true);
  if (a.rho_points < 3) {
    throw Error(ErrorKind::kInvalidArgument, "--rho-points must be at least 3");
  }
  if (a.sigma2.empty()) throw Error(ErrorKind::kInvalidArgument, "--sigma2 list is empty");
  CurveTable table;
  table.axis_name = "rho";
  table.axis = linear_grid(-1.0, 1.0, a.rho_points);
  for (double s2 : a.sigma2) {
    CurveSeries series{"sigma2=" + shortest(s2), {}};
    series.values.reserve(table.axis.size());
    for (double rho : table.axis) {
      series.values.push_back(two_point_mean_variance(a.sigma1, s2, rho));
    }
    table.series.push_back(std::move(series));
  }
  inv.parameters = {{"sigma1", a.sigma1}, {"sigma2", a.sigma2},
                    {"rho_points", a.rho_points}, {"format", format}};
  emit(inv, render(table, format), common, out, err);
  return kSuccess;
}

int cmd_delta_curve(const DeltaGridArgs& a, const Common& common, Invocation inv,
                    std::ostream& out, std::ostream& err) {
  const std::string format = resolve_format(common, "csv", true);
  if (a.delta_points < 2 || !(a.delta_min > 0.0) || !(a.delta_max > a.delta_min)) {
    throw Error(ErrorKind::kInvalidArgument,
                "delta grid needs 0 < --delta-min < --delta-max and --delta-points >= 2");
  }
  const SnrProfile profile = make_profile(a.alpha, common.no_normalize);
  const std::vector<double> deltas = log_grid(a.delta_min, a.delta_max, a.delta_points);
  const CurveTable table = variance_curve_vs_delta(profile, deltas, a.n_values, true);
  inv.parameters = {{"alpha", a.alpha},
                    {"normalized", !common.no_normalize},
                    {"n", a.n_values},
                    {"delta_min", a.delta_min},
                    {"delta_max", a.delta_max},
                    {"delta_points", a.delta_points},
                    {"format", format}};
  emit(inv, render(table, format), common, out, err);
  return kSuccess;
}

int cmd_fig4(const Fig4Args& a, const Common& common, Invocation inv, std::ostream& out,
             std::ostream& err) {
  const std::string format = resolve_format(common, "csv", true);
  if (a.n_max < 1) throw Error(ErrorKind::kInvalidArgument, "--n-max must be positive");
  if (a.deltas.empty()) throw Error(ErrorKind::kInvalidArgument, "--delta list is empty");
  const SnrProfile profile = make_profile(a.alpha, common.no_normalize);
  std::vector<long> n_values(static_cast<std::size_t>(a.n_max));
  for (long k = 0; k < a.n_max; ++k) n_values[static_cast<std::size_t>(k)] = k + 1;

  CurveTable table;
  for (double delta : a.deltas) {
    CurveTable one = variance_curve_vs_n(profile, delta, n_values);
    if (table.series.empty()) {
      table.axis_name = one.axis_name;
      table.axis = one.axis;
    }
    for (CurveSeries& s : one.series) table.series.push_back(std::move(s));
  }
  inv.parameters = {{"alpha", a.alpha},
                    {"normalized", !common.no_normalize},
                    {"delta", a.deltas},
                    {"n_max", a.n_max},
                    {"format", format}};
  emit(inv, render(table, format), common, out, err);
  return kSuccess;
}

struct SignChoice {
  SignVector signs;
  std::string source;
};

SignChoice resolve_signs(const io::Problem& p) {
  const Eigen::Index n = p.size();
  if (p.signs) return {*p.signs, "file"};
  if (p.correlation_model == "ar1") {
    return {*p.ar1_rho < 0.0 ? SignVector::alternating(n) : SignVector::all_positive(n),
            "ar1"};
  }
  if (p.correlation_model == "exp") return {SignVector::all_positive(n), "exp"};
  return {sign_vector(CorrelationMatrix(p.correlation), p.sign_threshold), "correlation"};
}

Json negative_weights(const Eigen::MatrixXd& w) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (w(i, j) < 0.0) entries.push_back({{"parameter", i}, {"measurement", j}, {"weight", w(i, j)}});
    }
  }
  return {{"any_negative", !entries.empty()}, {"negative", std::move(entries)}};
}

int cmd_analyze(const ProblemArgs& a, const Common& common, Invocation inv,
                std::ostream& out, std::ostream& err) {
  resolve_format(common, "json", false);
  const io::Problem p = io::load_problem(a.path);
  const DesignMatrix x(p.design);
  const Observation y(p.y);
  const CorrelationMatrix r(p.correlation);
  const Eigen::MatrixXd sigma = p.covariance();

  Json report = Json::object();
  report["problem"] = {{"n", x.rows()},
                       {"m", x.cols()},
                       {"correlation_model", p.correlation_model},
                       {"correlation_rank", r.numerical_rank()}};
  report["kappa"] = kappa(r);

  try {
    const BlueResult blue = blue_fit(y, x, sigma);
    report["blue"] = io::to_json(blue);
    report["weight_diagnostics"] = negative_weights(blue.weights);
  } catch (const Error& e) {
    report["blue"] = nullptr;
    report["blue_error"] = error_json(e);
    report["weight_diagnostics"] = nullptr;
  }

  try {
    const Eigen::Index rank = r.numerical_rank();
    if (rank > 1 && rank < r.size()) {
      report["limit_source"] = "singular_covariance";
      report["limit"] = io::to_json(limit_variance_prediction(x, sigma));
    } else {
      const SignChoice choice = resolve_signs(p);
      report["limit_source"] = "rank_one";
      report["signs"] = choice.signs.values();
      report["sign_source"] = choice.source;
      report["limit"] = io::to_json(limit_variance_prediction(x, p.sigma, choice.signs));
    }
  } catch (const Error& e) {
    report["limit"] = nullptr;
    report["limit_error"] = error_json(e);
  }

  inv.parameters = {{"problem", a.path}, {"format", "json"}};
  inv.inputs.push_back(a.path);
  emit(inv, io::dump_json(report) + "\n", common, out, err);
  return kSuccess;
}

int cmd_mc_validate(const ProblemArgs& a, const Common& common, Invocation inv,
                    std::ostream& out, std::ostream& err) {
  resolve_format(common, "json", false);
  if (a.mode != "auto" && a.mode != "blue" && a.mode != "noise-free") {
    throw Error(ErrorKind::kInvalidArgument, "--mode must be auto, blue or noise-free");
  }
  const io::Problem p = io::load_problem(a.path);
  const DesignMatrix x(p.design);
  const Eigen::MatrixXd sigma = p.covariance();

  McConfig config;
  config.trials = common.trials;
  config.seed = common.seed;
  if (p.beta_true) config.beta_true = *p.beta_true;
  config.parallel_chunks =
      a.threads > 0 ? a.threads : std::max(1u, std::thread::hardware_concurrency());

  EstimatorMode mode = a.mode == "noise-free" ? EstimatorMode::kNoiseFree
                                               : EstimatorMode::kBlue;
  McReport report;
  try {
    report = empirical_estimator_covariance(x, sigma, config, mode, p.expected_covariance);
  } catch (const IllConditionedError&) {
    if (a.mode != "auto") throw;
    mode = EstimatorMode::kNoiseFree;
    report = empirical_estimator_covariance(x, sigma, config, mode, p.expected_covariance);
  }

  inv.parameters = {{"problem", a.path},
                    {"trials", config.trials},
                    {"seed", config.seed},
                    {"mode", to_string(mode)},
                    {"format", "json"}};
  inv.inputs.push_back(a.path);
  emit(inv, io::dump_json(io::to_json(report)) + "\n", common, out, err);
  if (!report.passes()) {
    err << "mc-validate: FAIL, max standardized deviation "
        << io::format_number(report.max_standardized_deviation) << ", bias "
        << io::format_number(report.max_standardized_bias) << " (threshold 4)\n";
    return kValidationFailure;
  }
  return kSuccess;
}

int cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  Json manifest;
  try {
    manifest = Json::parse(io::read_file(manifest_path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kParse, manifest_path + ": " + e.what());
  }
  if (!manifest.is_object() || manifest.value("tool", "") != "strongcorr" ||
      !manifest.contains("argv") || !manifest.contains("outputs")) {
    throw Error(ErrorKind::kParse, manifest_path + ": not a run manifest");
  }
  for (const Json& input : manifest.value("inputs", Json::array())) {
    const std::string path = input.at("path").get<std::string>();
    if (sha256_hex(io::read_file(path)) != input.at("sha256").get<std::string>()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "input '" + path + "' changed since the manifest was written");
    }
  }
  const auto argv = manifest.at("argv").get<std::vector<std::string>>();
  if (!argv.empty() && argv.front() == "replay") {
    throw Error(ErrorKind::kParse, manifest_path + ": manifest records a replay");
  }
  std::ostringstream captured;
  std::ostringstream diagnostics;
  const int code = run(argv, captured, diagnostics);
  const Json& recorded = manifest.at("outputs").at(0);
  const std::string path = recorded.at("path").get<std::string>();
  const std::string bytes = path == "-" ? captured.str() : io::read_file(path);
  if (path == "-") out << bytes;
  if (code != kSuccess && code != kValidationFailure) {
    err << diagnostics.str();
    return code;
  }
  if (sha256_hex(bytes) != recorded.at("sha256").get<std::string>()) {
    err << "replay: output '" << path << "' differs from the manifest\n";
    return kValidationFailure;
  }
  err << "replay: output '" << path << "' reproduced byte-identically\n";
  return kSuccess;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0x0F];
  }
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Estimation with strongly correlated measurements", "strongcorr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  Fig1Args fig1;
  DeltaGridArgs fig3;
  DeltaGridArgs fig5;
  fig5.alpha = 0.0;
  Fig4Args fig4;
  ProblemArgs analyze;
  ProblemArgs mc;
  std::string manifest_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output file (default stdout)");
    sub->add_option("--format", common.format, "csv or json");
    sub->add_option("--seed", common.seed, "Random seed");
    sub->add_option("--trials", common.trials, "Monte Carlo trials")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--no-normalize", common.no_normalize,
                  "Use tau(s) = 1 + alpha s instead of tau(1) = 1");
  };

  CLI::App* s_fig1 = app.add_subcommand("fig1", "Two-point variance against rho");
  add_common(s_fig1);
  s_fig1->add_option("--sigma1", fig1.sigma1, "First deviation")->check(CLI::PositiveNumber);
  s_fig1->add_option("--sigma2", fig1.sigma2, "Second deviations")->delimiter(',');
  s_fig1->add_option("--rho-points", fig1.rho_points, "Grid points on [-1, 1]");

  auto add_delta_curve = [&](CLI::App* sub, DeltaGridArgs& a) {
    add_common(sub);
    sub->add_option("--alpha", a.alpha, "Profile slope");
    sub->add_option("--n", a.n_values, "Interval counts")->delimiter(',');
    sub->add_option("--delta-min", a.delta_min, "Smallest correlation length");
    sub->add_option("--delta-max", a.delta_max, "Largest correlation length");
    sub->add_option("--delta-points", a.delta_points, "Log-spaced grid points");
  };
  CLI::App* s_fig3 = app.add_subcommand("fig3", "Variance against delta, alpha = 1");
  add_delta_curve(s_fig3, fig3);
  CLI::App* s_fig5 = app.add_subcommand("fig5", "Variance against delta, alpha = 0");
  add_delta_curve(s_fig5, fig5);

  CLI::App* s_fig4 = app.add_subcommand("fig4", "Variance against interval count");
  add_common(s_fig4);
  s_fig4->add_option("--alpha", fig4.alpha, "Profile slope");
  s_fig4->add_option("--delta", fig4.deltas, "Correlation lengths")->delimiter(',');
  s_fig4->add_option("--n-max", fig4.n_max, "Largest interval count");

  CLI::App* s_analyze = app.add_subcommand("analyze", "Fit and limit analysis of a problem file");
  add_common(s_analyze);
  s_analyze->add_option("problem", analyze.path, "Problem JSON")->required();

  CLI::App* s_mc = app.add_subcommand("mc-validate", "Monte Carlo check of the estimator covariance");
  add_common(s_mc);
  s_mc->add_option("problem", mc.path, "Problem JSON")->required();
  s_mc->add_option("--mode", mc.mode, "auto, blue or noise-free");
  s_mc->add_option("--threads", mc.threads, "Worker threads (0 = hardware)");

  CLI::App* s_replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  s_replay->add_option("manifest", manifest_path, "Manifest JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  Invocation inv;
  inv.argv = args;
  try {
    if (s_fig1->parsed()) {
      inv.command = "fig1";
      return cmd_fig1(fig1, common, inv, out, err);
    }
    if (s_fig3->parsed()) {
      inv.command = "fig3";
      return cmd_delta_curve(fig3, common, inv, out, err);
    }
    if (s_fig5->parsed()) {
      inv.command = "fig5";
      return cmd_delta_curve(fig5, common, inv, out, err);
    }
    if (s_fig4->parsed()) {
      inv.command = "fig4";
      return cmd_fig4(fig4, common, inv, out, err);
    }
    if (s_analyze->parsed()) {
      inv.command = "analyze";
      return cmd_analyze(analyze, common, inv, out, err);
    }
    if (s_mc->parsed()) {
      inv.command = "mc-validate";
      return cmd_mc_validate(mc, common, inv, out, err);
    }
    return cmd_replay(manifest_path, out, err);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace strongcorr::cli
