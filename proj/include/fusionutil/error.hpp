#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fusionutil {

enum class ErrorCode {
  InvalidArgument,
  OutOfRange,
  DegenerateDenominator,
  MissingInterval,
  TooFewObservations,
  BadFoldCount,
  SingularDesign,
  PlanMismatch,
  ZeroDispersion,
  EmptyNeighborhood,
  DegenerateVariance,
  VanishingDensity,
  ZeroSColumn,
  DegenerateResidualVariance,
  IoError,
  ParseError,
  EmptyData,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library. `stage` names the pipeline step that
// failed (empty when raised outside a composite assessment).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  // Copy of this error tagged with a stage, keeping an existing tag.
  Error at_stage(std::string stage) const {
    return Error(code_, what(), stage_.empty() ? std::move(stage) : stage_);
  }

 private:
  ErrorCode code_;
  std::string stage_;
};

// Runs `fn`, re-throwing any library error tagged with `stage`.
template <typename Fn>
auto staged(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.at_stage(std::string(stage));
  }
}

}  // namespace fusionutil
