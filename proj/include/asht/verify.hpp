#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace asht {

struct VerifyOptions {
  std::uint64_t fuzz_seed = 1;
  /// Added to every closed-form LP value before comparison; a nonzero value
  /// must make the LP check fail.
  double lp_perturbation = 0.0;
};

struct CheckResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::size_t failures = 0;
  /// First failing case, or a summary.
  std::string detail;
};

/// Runs every oracle and invariant check on a fuzz corpus derived from the
/// seed.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

nlohmann::json verification_to_json(const VerifyOptions& options,
                                    const std::vector<CheckResult>& checks);

}  // namespace asht
