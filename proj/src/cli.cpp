#include "fusionutil/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fusionutil/linreg_utility.hpp"
#include "fusionutil/mean_utility.hpp"
#include "fusionutil/quantile_utility.hpp"
#include "fusionutil/simulation.hpp"

namespace fusionutil::cli {

namespace {

// Raised for invalid flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v);
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return kExitIo;
    case ErrorCode::ParseError:
    case ErrorCode::EmptyData: return kExitParse;
    default: return kExitEstimation;
  }
}

void check_unit(double v, bool closed_lo, const char* name) {
  const bool ok = (closed_lo ? v >= 0.0 : v > 0.0) && v < 1.0;
  if (!ok) {
    throw UsageError(std::string("--") + name + " must lie in " + (closed_lo ? "[0, 1)" : "(0, 1)"));
  }
}

RegressorSpec regressor_from(const std::string& name) {
  RegressorSpec spec;
  spec.kind = parse_regressor_kind(name);
  return spec;
}

void write_csv_estimate(std::ostream& out, const UtilityEstimate& u,
                        const std::optional<RelativeUtility>& rel) {
  out << "method,n,nu,alpha,theta_hat_raw,theta_hat,theta_tilde_raw,gamma_hat,"
         "ci_raw_lo,ci_raw_hi,ci_lo,ci_hi,theta1_hat,theta2_hat";
  if (rel) out << ",relative,relative_lo,relative_hi";
  out << '\n';
  out << to_string(u.method) << ',' << u.n << ',' << g17(u.nu) << ',' << g17(u.alpha) << ','
      << g17(u.theta_hat_raw) << ',' << g17(u.theta_hat) << ','
      << (u.theta_tilde_raw ? g17(*u.theta_tilde_raw) : "") << ',' << g17(u.gamma_hat) << ','
      << g17(u.ci_raw->lo) << ',' << g17(u.ci_raw->hi) << ',' << g17(u.ci->lo) << ','
      << g17(u.ci->hi) << ',' << g17(u.bounds.theta1_hat) << ',' << g17(u.bounds.theta2_hat);
  if (rel) out << ',' << g17(rel->point) << ',' << g17(rel->ci.lo) << ',' << g17(rel->ci.hi);
  out << '\n';
}

void write_text_estimate(std::ostream& out, const UtilityEstimate& u,
                         const std::optional<RelativeUtility>& rel) {
  char buf[128];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%-16s %.6f\n", key, v);
    out << buf;
  };
  auto range = [&](const char* key, const Interval& iv) {
    std::snprintf(buf, sizeof buf, "%-16s [%.6f, %.6f]\n", key, iv.lo, iv.hi);
    out << buf;
  };
  out << "method           " << to_string(u.method) << '\n';
  out << "n                " << u.n << '\n';
  line("nu", u.nu);
  line("alpha", u.alpha);
  line("theta_hat", u.theta_hat);
  line("theta_hat_raw", u.theta_hat_raw);
  if (u.theta_tilde_raw) line("theta_tilde_raw", *u.theta_tilde_raw);
  line("gamma_hat", u.gamma_hat);
  range("ci", *u.ci);
  range("ci_raw", *u.ci_raw);
  if (rel) {
    line("relative", rel->point);
    range("relative_ci", rel->ci);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Input

Dataset parse_csv(const std::string& path, const std::optional<std::string>& response) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyData, "'" + path + "' is empty");
  const auto header = split_fields(line);
  if (header.size() < 2) {
    throw Error(ErrorCode::ParseError, "need a response column and at least one covariate");
  }
  std::size_t ycol = 0;
  if (response) {
    const auto it = std::find(header.begin(), header.end(), *response);
    if (it == header.end()) throw Error(ErrorCode::ParseError, "no column named '" + *response + "'");
    ycol = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> bad;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_no;
    const auto fields = split_fields(line);
    std::vector<double> vals(header.size());
    bool ok = fields.size() == header.size();
    for (std::size_t j = 0; ok && j < fields.size(); ++j) ok = parse_number(fields[j], vals[j]);
    if (ok) {
      rows.push_back(std::move(vals));
    } else {
      bad.push_back(row_no);
    }
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "missing or non-numeric values in data row" << (bad.size() > 1 ? "s " : " ");
    for (std::size_t k = 0; k < bad.size(); ++k) msg << (k ? ", " : "") << bad[k];
    throw Error(ErrorCode::ParseError, msg.str());
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyData, "'" + path + "' has no data rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(header.size() - 1);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, p);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != ycol) names.push_back(header[j]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j == ycol) {
        y(i) = r[j];
      } else {
        x(i, c++) = r[j];
      }
    }
  }
  return Dataset(std::move(y), std::move(x), std::move(names), header[ycol]);
}

// ---------------------------------------------------------------------------
// assess

UtilityEstimate assess_dataset(const Dataset& data, const AssessOptions& opt) {
  switch (opt.method) {
    case Method::MeanConditional:
    case Method::MeanLinear: {
      MeanAssessmentConfig cfg;
      cfg.nu = opt.nu;
      cfg.g_mode = opt.method == Method::MeanLinear ? MeanMode::Linear : MeanMode::ConditionalMean;
      cfg.folds = opt.folds;
      cfg.alpha = opt.alpha;
      cfg.seed = opt.seed;
      cfg.regressor = regressor_from(opt.regressor);
      return assess_mean(data, cfg);
    }
    case Method::Quantile: {
      QuantileAssessmentConfig cfg;
      cfg.nu = opt.nu;
      cfg.tau = opt.tau;
      cfg.folds = opt.folds;
      cfg.alpha = opt.alpha;
      cfg.seed = opt.seed;
      cfg.regressor = regressor_from(opt.regressor);
      return assess_quantile(data, cfg);
    }
    case Method::LinReg: {
      const std::size_t s = opt.s_column ? data.column_index(*opt.s_column) : 0;
      if (!opt.center) return assess_linreg(data, s, opt.nu, opt.alpha);
      const Eigen::MatrixXd xc = data.x().rowwise() - data.x().colwise().mean();
      const Dataset centered(data.y(), xc, data.column_names(), data.response_name());
      return assess_linreg(centered, s, opt.nu, opt.alpha);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

nlohmann::json estimate_to_json(const UtilityEstimate& u, const std::optional<RelativeUtility>& rel) {
  auto interval = [](const std::optional<Interval>& iv) -> nlohmann::json {
    if (!iv) return nullptr;
    return {{"lo", iv->lo}, {"hi", iv->hi}};
  };
  nlohmann::json j;
  j["method"] = std::string(to_string(u.method));
  j["n"] = u.n;
  j["nu"] = u.nu;
  j["alpha"] = u.alpha;
  j["theta_hat_raw"] = u.theta_hat_raw;
  j["theta_hat"] = u.theta_hat;
  j["theta_tilde_raw"] = u.theta_tilde_raw ? nlohmann::json(*u.theta_tilde_raw) : nlohmann::json();
  j["gamma_hat"] = u.gamma_hat;
  j["ci_raw"] = interval(u.ci_raw);
  j["ci"] = interval(u.ci);
  j["theta1_hat"] = u.bounds.theta1_hat;
  j["theta2_hat"] = u.bounds.theta2_hat;
  if (rel) j["relative"] = {{"point", rel->point}, {"ci", {{"lo", rel->ci.lo}, {"hi", rel->ci.hi}}}};
  return j;
}

void report_error(std::ostream& err, const std::string& code, const std::string& stage,
                  const std::string& message) {
  nlohmann::json j{{"error", code}, {"stage", stage}, {"message", message}};
  err << j.dump() << '\n';
}

int run_assess(const AssessOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    check_unit(opt.nu, true, "nu");
    check_unit(opt.alpha, false, "alpha");
    if (opt.method == Method::Quantile) check_unit(opt.tau, false, "tau");
    if (opt.folds < 2) throw UsageError("--folds must be at least 2");
    if (opt.input.empty()) throw UsageError("--input is required");
    if (opt.regressor != "local-linear" && opt.regressor != "k-nn") {
      throw UsageError("--regressor must be local-linear or k-nn");
    }

    const Dataset data = staged("input", [&] { return parse_csv(opt.input, opt.response); });
    const UtilityEstimate u = assess_dataset(data, opt);
    std::optional<RelativeUtility> rel;
    if (opt.relative) rel = relative_utility(u);

    switch (opt.format) {
      case OutputFormat::Json: {
        auto j = estimate_to_json(u, rel);
        if (opt.method == Method::Quantile) j["tau"] = opt.tau;
        if (opt.method == Method::LinReg) {
          j["s_column"] = opt.s_column ? *opt.s_column : data.column_names().front();
        }
        out << j.dump() << '\n';
        break;
      }
      case OutputFormat::Csv:
        write_csv_estimate(out, u, rel);
        break;
      case OutputFormat::Text:
        write_text_estimate(out, u, rel);
        break;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    report_error(err, "Usage", "cli", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    report_error(err, std::string(to_string(e.code())), e.stage(), e.what());
    return exit_code_for(e.code());
  }
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    check_unit(opt.nu, true, "nu");
    check_unit(opt.alpha, false, "alpha");
    if (opt.method == Method::Quantile) {
      for (double t : opt.tau) check_unit(t, false, "tau");
    }
    if (!(std::abs(opt.rho) < 1.0)) throw UsageError("--rho must lie in (-1, 1)");
    if (opt.b.empty() || opt.n.empty()) throw UsageError("--b and --n need at least one value");
    if (opt.reps < 1) throw UsageError("--reps must be at least 1");
    if (opt.folds < 2) throw UsageError("--folds must be at least 2");
    if (opt.out.empty()) throw UsageError("--out is required");

    const std::vector<double> taus =
        opt.method == Method::Quantile ? opt.tau : std::vector<double>{0.5};
    std::vector<ReportRow> rows;
    for (double tau : taus) {
      for (std::size_t n : opt.n) {
        for (double b : opt.b) {
          CellConfig cell;
          cell.method = opt.method;
          cell.dgp = DgpConfig{b, opt.rho, n, opt.nu, 0};
          cell.tau = tau;
          cell.folds = opt.folds;
          cell.alpha = opt.alpha;
          rows.push_back(staged("simulate", [&] {
            return run_monte_carlo(cell, opt.reps, opt.seed, opt.threads);
          }));
        }
      }
    }

    std::error_code ec;
    std::filesystem::create_directories(opt.out, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + opt.out + "': " + ec.message());
    const std::string stem = (std::filesystem::path(opt.out) / std::string(to_string(opt.method))).string();
    std::ofstream csv(stem + ".csv", std::ios::binary);
    std::ofstream txt(stem + ".txt", std::ios::binary);
    if (!csv || !txt) throw Error(ErrorCode::IoError, "cannot write reports under '" + opt.out + "'");
    write_csv(csv, rows);
    write_text_table(txt, rows);
    write_text_table(out, rows);
    if (!csv || !txt) throw Error(ErrorCode::IoError, "write failed under '" + opt.out + "'");

    for (const auto& r : rows) {
      if (!r.flagged) continue;
      nlohmann::json w{{"warning", "FlaggedCell"},  {"method", std::string(to_string(r.method))},
                       {"b", r.b}, {"n", r.n}, {"extra", r.extra}, {"failures", r.failures},
                       {"reps", r.reps}};
      err << w.dump() << '\n';
    }
    return kExitOk;
  } catch (const UsageError& e) {
    report_error(err, "Usage", "cli", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    report_error(err, std::string(to_string(e.code())), e.stage(), e.what());
    return exit_code_for(e.code());
  }
}

// ---------------------------------------------------------------------------
// Command line

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Utility of external information for data fusion", "fusionutil"};
  app.require_subcommand(1);

  const std::map<std::string, Method> methods{{"mean-conditional", Method::MeanConditional},
                                              {"mean-linear", Method::MeanLinear},
                                              {"quantile", Method::Quantile},
                                              {"linreg", Method::LinReg}};
  const std::map<std::string, OutputFormat> formats{
      {"json", OutputFormat::Json}, {"csv", OutputFormat::Csv}, {"text", OutputFormat::Text}};

  AssessOptions a;
  auto* assess = app.add_subcommand("assess", "Assess the utility measure on a CSV dataset");
  std::string assess_method;
  std::string format = "json";
  assess->add_option("--method", assess_method, "mean-conditional, mean-linear, quantile or linreg")
      ->required()
      ->check(CLI::IsMember(methods));
  assess->add_option("--input", a.input, "CSV file with a header row")->required();
  assess->add_option("--nu", a.nu, "n / (n + N)")->required();
  assess->add_option("--tau", a.tau, "quantile level");
  assess->add_option("--s-column", a.s_column, "covariate of the external univariate fit (linreg)");
  assess->add_option("--response", a.response, "response column (default: first column)");
  assess->add_option("--alpha", a.alpha, "confidence level");
  assess->add_option("--folds", a.folds, "cross-fitting folds");
  assess->add_option("--seed", a.seed, "seed of the fold assignment");
  assess->add_option("--regressor", a.regressor, "local-linear or k-nn");
  assess->add_flag("--center", a.center, "subtract covariate means (linreg)");
  assess->add_flag("--relative", a.relative, "also report the relative utility");
  assess->add_option("--format", format, "json, csv or text")->check(CLI::IsMember(formats));

  SimulateOptions s;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo reproduction of the simulation tables");
  std::string simulate_method;
  simulate->add_option("--method", simulate_method, "mean-conditional, mean-linear, quantile or linreg")
      ->required()
      ->check(CLI::IsMember(methods));
  simulate->add_option("--b", s.b, "signal strengths")->required()->delimiter(',');
  simulate->add_option("--n", s.n, "sample sizes")->required()->delimiter(',');
  simulate->add_option("--tau", s.tau, "quantile levels")->delimiter(',');
  simulate->add_option("--reps", s.reps, "replications per cell")->required();
  simulate->add_option("--seed", s.seed, "master seed")->required();
  simulate->add_option("--out", s.out, "output directory")->required();
  simulate->add_option("--nu", s.nu, "n / (n + N)");
  simulate->add_option("--rho", s.rho, "corr(S, W)");
  simulate->add_option("--folds", s.folds, "cross-fitting folds");
  simulate->add_option("--alpha", s.alpha, "confidence level");
  simulate->add_option("--threads", s.threads, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "Usage", "cli", e.what());
    return kExitUsage;
  }

  if (assess->parsed()) {
    a.method = methods.at(assess_method);
    a.format = formats.at(format);
    return run_assess(a, out, err);
  }
  s.method = methods.at(simulate_method);
  return run_simulate(s, out, err);
}

}  // namespace fusionutil::cli
