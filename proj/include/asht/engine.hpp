#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asht/instance.hpp"
#include "asht/simulation.hpp"

namespace asht {

struct TrialRecord {
  std::string instance_id;
  std::string policy;
  double delta = 0.0;
  std::size_t rep = 0;
  std::size_t true_h = 0;
  std::size_t output_h = 0;
  double cost = 0.0;
  std::size_t steps = 0;
  bool correct = false;
  /// Base seed of the trial's streams.
  std::uint64_t seed = 0;
  /// Hit the selection cap; not written to CSV.
  bool capped = false;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Identifies a trial. The true hypothesis and outcome streams depend on
/// (master_seed, instance, rep) only, so every policy faces the same draws;
/// the policy stream also depends on `policy`.
struct TrialKey {
  std::uint64_t master_seed = 0;
  std::size_t instance = 0;
  std::size_t policy = 0;
  std::size_t rep = 0;
};

std::uint64_t trial_seed(const TrialKey& key);
std::size_t draw_true_hypothesis(const Instance& inst, const TrialKey& key);

TrialRecord run_trial(const Instance& inst, const Policy& policy, double delta,
                      const TrialKey& key, const std::string& instance_id,
                      const std::string& policy_id,
                      std::size_t selection_cap = kDefaultSelectionCap);

struct BatchJob {
  const Instance* instance = nullptr;
  std::string instance_id;
  std::size_t instance_index = 0;
  const Policy* policy = nullptr;
  std::string policy_id;
  std::size_t policy_index = 0;
  double delta = 0.0;
};

/// Runs `reps` trials of every job on `threads` workers. Records come back in
/// (job, rep) order regardless of the thread count.
std::vector<TrialRecord> run_batch(const std::vector<BatchJob>& jobs, std::size_t reps,
                                   std::uint64_t master_seed, std::size_t threads,
                                   std::size_t selection_cap = kDefaultSelectionCap);

struct Metrics {
  std::size_t trials = 0;
  std::size_t capped = 0;
  double accuracy = 0.0;
  double mean_cost = 0.0;
  double std_cost = 0.0;
  /// Standard error of mean_cost.
  double se_cost = 0.0;
  /// mean_cost over the reference cost, when one was given.
  std::optional<double> normalized_cost;
  /// confusion[true_h][output_h]
  std::vector<std::vector<std::size_t>> confusion;
  /// NaN where the denominator is empty.
  std::vector<double> sensitivity;
  std::vector<double> specificity;
  /// P_h(output != h); NaN for hypotheses never drawn.
  std::vector<double> pac_error;
  double max_pac_error = 0.0;
  /// sum_h pi(h) P_h(output != h) over the hypotheses that were drawn, with
  /// pi renormalized on them.
  double total_error = 0.0;
};

struct AggregateOptions {
  std::optional<double> reference_cost;
  /// Records from several instances are rejected unless this is set.
  bool allow_mixed_instances = false;
};

Metrics aggregate(std::span<const TrialRecord> records, std::span<const double> prior,
                  const AggregateOptions& options = {});

nlohmann::json metrics_to_json(const Metrics& m);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

void write_trial_csv(std::ostream& out, std::span<const TrialRecord> records);
void write_trial_csv(const std::filesystem::path& path, std::span<const TrialRecord> records);
std::vector<TrialRecord> read_trial_csv(std::istream& in);
std::vector<TrialRecord> read_trial_csv(const std::filesystem::path& path);

/// One (policy, delta) point of an accuracy-vs-cost curve.
struct CurvePoint {
  std::string policy;
  double delta = 0.0;
  std::size_t trials = 0;
  double accuracy = 0.0;
  double mean_cost = 0.0;
  double se_cost = 0.0;
  double norm_cost = 0.0;
};

/// Groups records by (policy, delta), policies in first-appearance order and
/// delta descending. norm_cost divides by the reference policy's largest
/// mean cost; throws ValidationError if that policy has no records.
std::vector<CurvePoint> accuracy_cost_curve(std::span<const TrialRecord> records,
                                            const std::string& reference_policy);

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points);

/// Mean cost and its standard error at the target accuracy, interpolated
/// linearly between the delta-grid points that bracket it.
struct MatchedCost {
  double mean_cost = 0.0;
  double se_cost = 0.0;
  /// The target lay outside the measured accuracies and the nearest point was
  /// used as is.
  bool clamped = false;
};

std::optional<MatchedCost> cost_at_accuracy(std::span<const CurvePoint> points,
                                            const std::string& policy, double target);

}  // namespace asht
