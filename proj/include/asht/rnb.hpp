#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "asht/instance.hpp"
#include "asht/ranking.hpp"
#include "asht/simulation.hpp"

namespace asht {

struct RnBParams {
  /// Saturation level B.
  double saturation = 0.0;
  /// Boosting intensity alpha.
  std::size_t boost = 1;
  double delta = 0.1;
  /// Copies M of each action in the greedy ground set.
  std::size_t multiplicity = 1;

  /// alpha = ceil(1 + ln|H| / ln(1/delta)), B = ln(1/delta)/2 and the default M.
  static RnBParams defaults(const Instance& inst, double delta);
  /// Throws ValidationError unless delta in (0, 1/4], 0 < B <= ln(1/delta)/2,
  /// alpha >= 1 and M >= 1.
  void validate() const;
};

struct RnBPlan {
  /// Greedy ranking sigma.
  std::vector<std::size_t> ranked;
  /// sigma with each entry repeated alpha times.
  std::vector<std::size_t> boosted;
  std::size_t boost = 1;
  double saturation = 0.0;
  /// tau(h) = alpha * CT(f_h, sigma); nullopt for uncovered hypotheses.
  std::vector<std::optional<std::size_t>> timestamps;
  std::vector<std::size_t> uncovered;
};

RnBPlan build_plan(const Instance& inst, const RnBParams& params);

inline constexpr std::size_t kDefaultEta = 800;

/// Greedy with replacement for eta picks, truncated after the last position
/// where an action appears for the first time. alpha = 1.
RnBPlan build_plan_experiment(const Instance& inst, double saturation,
                              std::size_t eta = kDefaultEta);

/// Truncation length used by build_plan_experiment: one past the largest
/// index holding a first occurrence.
std::size_t first_occurrence_prefix(const std::vector<std::size_t>& sequence);

nlohmann::json plan_to_json(const RnBPlan& plan, const Instance& inst);

enum class StopRule {
  /// Check min_g log Lambda(h,g) >= alpha B / 2 at each timestamp tau(h).
  Timestamps,
  /// Stop once the posterior maximum reaches 1 - delta; the sequence repeats
  /// cyclically.
  Posterior,
};

struct ExecutionResult {
  std::size_t output = 0;
  double cost = 0.0;
  std::size_t steps = 0;
  /// False when the answer came from the argmax-posterior fallback.
  bool triggered = false;
};

ExecutionResult execute(const RnBPlan& plan, const Instance& inst, OutcomeSource& source);
ExecutionResult execute_posterior(const RnBPlan& plan, const Instance& inst, double delta,
                                  OutcomeSource& source);

class RnbPolicy final : public Policy {
 public:
  RnbPolicy(const Instance& inst, RnBPlan plan, StopRule rule, double delta, std::string name);

  std::string name() const override { return name_; }
  std::size_t run(OutcomeSource& source, RandomStream& rng) const override;
  const RnBPlan& plan() const { return plan_; }

 private:
  const Instance* inst_;
  RnBPlan plan_;
  StopRule rule_;
  double delta_;
  std::string name_;
};

}  // namespace asht
