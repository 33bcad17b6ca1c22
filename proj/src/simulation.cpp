#include "fusionutil/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <thread>

#include "fusionutil/linreg_utility.hpp"
#include "fusionutil/mean_utility.hpp"
#include "fusionutil/quantile_utility.hpp"

namespace fusionutil {

namespace {
std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void validate(const DgpConfig& cfg) {
  if (!(std::abs(cfg.rho) < 1.0)) throw Error(ErrorCode::OutOfRange, "rho must lie in (-1, 1)");
  if (!std::isfinite(cfg.b)) throw Error(ErrorCode::InvalidArgument, "b must be finite");
  if (cfg.n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
}

// ---------------------------------------------------------------------------
// Data generation

Dataset generate_dgp(const DgpConfig& cfg) {
  CounterRng rng(cfg.seed, kStreamData);
  return generate_dgp(cfg, rng);
}

Dataset generate_dgp(const DgpConfig& cfg, CounterRng& stream) {
  validate(cfg);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const double c = std::sqrt(1.0 - cfg.rho * cfg.rho);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z1 = stream.normal();
    const double z2 = stream.normal();
    const double z3 = stream.normal();
    x(i, 0) = z1;
    x(i, 1) = cfg.rho * z1 + c * z2;
    y(i) = cfg.b * (x(i, 0) + x(i, 1)) + z3;
  }
  return Dataset(std::move(y), std::move(x), {"S", "W"}, "Y");
}

// ---------------------------------------------------------------------------
// Population values

double true_theta_mean(double b, double rho, double nu) {
  const double v = 2.0 * b * b * (1.0 + rho);
  return 1.0 - (1.0 - nu) * v / (v + 1.0);
}

double true_theta_quantile(double b, double rho, double nu, double tau) {
  const double v = 2.0 * b * b * (1.0 + rho);
  if (v == 0.0) return 1.0;
  const double shift = normal_quantile(tau) * std::sqrt(v + 1.0);
  const double e = gauss_hermite_expectation(
      [&](double z) {
        const double p = normal_cdf(shift - z);
        return p * p;
      },
      std::sqrt(v));
  return (1.0 - nu) * (tau - e) / (tau * (1.0 - tau)) + nu;
}

double true_theta_linreg(double b, double rho, double nu) {
  const double r = 1.0 - rho * rho;
  return 1.0 - (1.0 - nu) * r / (2.0 * (1.0 + b * b * r));
}

GaussHermiteRule gauss_hermite_rule(std::size_t order) {
  const auto m = static_cast<Eigen::Index>(order);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 1; k < m; ++k) {
    jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k) / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  constexpr double kSqrtPi = 1.7724538509055160273;
  GaussHermiteRule rule;
  for (Eigen::Index i = 0; i < m; ++i) {
    rule.nodes.push_back(es.eigenvalues()(i));
    const double v0 = es.eigenvectors()(0, i);
    rule.weights.push_back(kSqrtPi * v0 * v0);
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Monte Carlo

double cell_truth(const CellConfig& cell) {
  const auto& d = cell.dgp;
  switch (cell.method) {
    case Method::MeanConditional:
    case Method::MeanLinear:
      return true_theta_mean(d.b, d.rho, d.nu);
    case Method::Quantile:
      return true_theta_quantile(d.b, d.rho, d.nu, cell.tau);
    case Method::LinReg:
      return true_theta_linreg(d.b, d.rho, d.nu);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

UtilityEstimate assess_cell(const CellConfig& cell, const Dataset& data, std::uint64_t seed) {
  switch (cell.method) {
    case Method::MeanConditional:
    case Method::MeanLinear: {
      MeanAssessmentConfig cfg;
      cfg.nu = cell.dgp.nu;
      cfg.g_mode = cell.method == Method::MeanLinear ? MeanMode::Linear : MeanMode::ConditionalMean;
      cfg.folds = cell.folds;
      cfg.alpha = cell.alpha;
      cfg.seed = seed;
      cfg.regressor = cell.regressor;
      return assess_mean(data, cfg);
    }
    case Method::Quantile: {
      QuantileAssessmentConfig cfg;
      cfg.nu = cell.dgp.nu;
      cfg.tau = cell.tau;
      cfg.folds = cell.folds;
      cfg.alpha = cell.alpha;
      cfg.seed = seed;
      cfg.regressor = cell.regressor;
      return assess_quantile(data, cfg);
    }
    case Method::LinReg:
      return assess_linreg(data, cell.s_index, cell.dgp.nu, cell.alpha);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

std::string cell_extra(const CellConfig& cell) {
  switch (cell.method) {
    case Method::MeanConditional: return "conditional";
    case Method::MeanLinear: return "linear";
    case Method::Quantile: return format_g17(cell.tau);
    case Method::LinReg: return "-";
  }
  return "-";
}

ReportRow run_monte_carlo(const CellConfig& cell, std::size_t reps, std::uint64_t seed,
                          std::size_t threads) {
  if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be at least 1");
  validate(cell.dgp);
  const double theta0 = cell_truth(cell);

  struct Slot {
    bool ok = false;
    double abs_error = 0.0;
    double length = 0.0;
    bool covered = false;
  };
  std::vector<Slot> slots(reps);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
      const std::uint64_t s = derive_seed(seed, r);
      try {
        DgpConfig dgp = cell.dgp;
        dgp.seed = s;
        const UtilityEstimate u = assess_cell(cell, generate_dgp(dgp), s);
        slots[r].abs_error = std::abs(u.theta_hat - theta0);
        slots[r].length = u.ci->length();
        slots[r].covered = u.ci->contains(theta0);
        slots[r].ok = true;
      } catch (const Error&) {
        slots[r].ok = false;
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, reps);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ReportRow row;
  row.method = cell.method;
  row.b = cell.dgp.b;
  row.n = cell.dgp.n;
  row.extra = cell_extra(cell);
  row.reps = reps;
  row.seed = seed;
  row.theta0 = theta0;

  std::size_t ok = 0;
  double sum_err = 0.0;
  double sum_len = 0.0;
  double hits = 0.0;
  for (const auto& s : slots) {
    if (!s.ok) {
      ++row.failures;
      continue;
    }
    ++ok;
    sum_err += s.abs_error;
    sum_len += s.length;
    hits += s.covered ? 1.0 : 0.0;
  }
  row.flagged = static_cast<double>(row.failures) > 0.01 * static_cast<double>(reps);
  if (ok == 0) {
    row.mae = row.sdae = row.al = row.cr = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  const double k = static_cast<double>(ok);
  row.mae = sum_err / k;
  row.al = sum_len / k;
  row.cr = hits / k;
  if (ok > 1) {
    double ss = 0.0;
    for (const auto& s : slots) {
      if (s.ok) ss += (s.abs_error - row.mae) * (s.abs_error - row.mae);
    }
    row.sdae = std::sqrt(ss / (k - 1.0));
  }
  return row;
}

// ---------------------------------------------------------------------------
// Reports

void write_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "method,b,n,extra,reps,seed,MAE,SDAE,AL,CR\n";
  for (const auto& r : rows) {
    os << to_string(r.method) << ',' << format_g17(r.b) << ',' << r.n << ',' << r.extra << ','
       << r.reps << ',' << r.seed << ',' << format_g17(r.mae) << ',' << format_g17(r.sdae) << ','
       << format_g17(r.al) << ',' << format_g17(r.cr) << '\n';
  }
}

void write_text_table(std::ostream& os, const std::vector<ReportRow>& rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-17s %5s %6s %-12s %9s %9s %9s %9s  %s\n", "method", "b", "n",
                "extra", "MAE", "SDAE", "AL", "CR", "theta0");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-17s %5.2f %6zu %-12s %9.4f %9.4f %9.4f %9.4f  %.6f",
                  std::string(to_string(r.method)).c_str(), r.b, r.n, r.extra.c_str(),
                  100.0 * r.mae, 100.0 * r.sdae, 100.0 * r.al, 100.0 * r.cr, r.theta0);
    os << buf;
    if (r.failures > 0) {
      os << "  failures=" << r.failures << '/' << r.reps << (r.flagged ? " FLAGGED" : "");
    }
    os << '\n';
  }
  os << "(MAE, SDAE, AL and CR multiplied by 100)\n";
}

}  // namespace fusionutil
