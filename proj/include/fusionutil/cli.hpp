#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusionutil/core.hpp"
#include "fusionutil/dataset.hpp"

namespace fusionutil::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitParse = 4;
inline constexpr int kExitEstimation = 5;

// Reads a headed, comma-separated numeric table. The response column is
// `response` when given, else the first column; all other columns are
// covariates. Rows with missing or non-numeric cells raise ParseError listing
// the offending row numbers (1-based data rows).
Dataset parse_csv(const std::string& path, const std::optional<std::string>& response = {});

enum class OutputFormat { Json, Csv, Text };

struct AssessOptions {
  Method method = Method::MeanLinear;
  std::string input;
  double nu = 0.5;
  double tau = 0.5;
  double alpha = 0.95;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::optional<std::string> response;
  std::optional<std::string> s_column;
  std::string regressor = "local-linear";
  bool center = false;
  bool relative = false;
  OutputFormat format = OutputFormat::Json;
};

struct SimulateOptions {
  Method method = Method::MeanLinear;
  std::vector<double> b;
  std::vector<std::size_t> n;
  std::vector<double> tau{0.5};
  std::size_t reps = 300;
  std::uint64_t seed = 0;
  std::string out;
  double nu = 0.5;
  double rho = 0.2;
  std::size_t folds = 5;
  double alpha = 0.95;
  std::size_t threads = 0;
};

// Assessment of an in-memory dataset, as done by the assess command.
UtilityEstimate assess_dataset(const Dataset& data, const AssessOptions& opt);

nlohmann::json estimate_to_json(const UtilityEstimate& u,
                                const std::optional<RelativeUtility>& rel = {});

int run_assess(const AssessOptions& opt, std::ostream& out, std::ostream& err);
int run_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

// Full command line: `assess ...` or `simulate ...`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Single-line JSON error record written to the error stream.
void report_error(std::ostream& err, const std::string& code, const std::string& stage,
                  const std::string& message);

}  // namespace fusionutil::cli
