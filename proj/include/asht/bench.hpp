#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace asht {

struct BenchOptions {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  /// Criterion ids to run; empty runs all ten.
  std::set<int> only;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string summary;
  nlohmann::json details;
  double seconds = 0.0;
};

inline constexpr double kMatchedAccuracy = 0.95;

/// Runs the canned acceptance experiments in id order.
std::vector<CriterionResult> run_acceptance(const BenchOptions& options);

nlohmann::json acceptance_to_json(const std::vector<CriterionResult>& results);

}  // namespace asht
