#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asht/engine.hpp"
#include "asht/instance.hpp"
#include "asht/policies.hpp"

namespace asht {

struct GenerateSpec {
  std::size_t num_h = 25;
  std::size_t num_a = 40;
  SyntheticMode mode;
  std::size_t count = 1;
  std::uint64_t seed = 1;

  friend bool operator==(const GenerateSpec& a, const GenerateSpec& b) {
    return a.num_h == b.num_h && a.num_a == b.num_a && a.mode.kind == b.mode.kind &&
           a.mode.grid_k == b.mode.grid_k && a.count == b.count && a.seed == b.seed;
  }
};

struct ExperimentConfig {
  /// Exactly one of `generate` and `instance_files` is used.
  std::optional<GenerateSpec> generate;
  std::vector<std::string> instance_files;
  std::vector<PolicySpec> policies;
  std::vector<double> deltas{0.05};
  std::size_t replications = 100;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;
  std::size_t selection_cap = kDefaultSelectionCap;
  std::string reference_policy = "random";
  std::string trials_path;
  std::string metrics_path;
  std::string plot_path;

  /// Throws ValidationError unless every delta lies in (0, 1/2), there is at
  /// least one replication and policy, and exactly one instance source.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

struct NamedInstance {
  std::string id;
  Instance instance;
};

/// Generated instance i uses seed derive_seed({seed, i}) and id "syn<i>";
/// files use their stem.
std::vector<NamedInstance> materialize_instances(const ExperimentConfig& cfg);

/// Every (instance, policy, delta) job for `replications` trials, records in
/// that nesting order.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg,
                                        const std::vector<NamedInstance>& instances);

/// Per-(instance, policy, delta) metrics plus the pooled curve when the
/// reference policy is present.
nlohmann::json experiment_metrics_json(const ExperimentConfig& cfg,
                                       const std::vector<NamedInstance>& instances,
                                       const std::vector<TrialRecord>& records);

}  // namespace asht
