#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "asht/instance.hpp"

namespace asht {

/// The coverage function f_h^B over multisets S of actions:
///
///   f_h^B(S) = (|H|-1)^-1 * sum_{g != h} min{1, B^-1 * sum_{a in S} d(g,h;a)}
///
/// Monotone, submodular, f(empty) = 0 and f(S) = 1 exactly when every g has
/// collected at least B nats against h. With |H| = 1 it is identically 1.
class CoverFunction {
 public:
  CoverFunction(const Instance& inst, std::size_t h, double saturation);

  std::size_t hypothesis() const { return h_; }
  double saturation() const { return saturation_; }
  const Instance& instance() const { return *inst_; }

  /// counts[a] is the multiplicity of action a in S.
  double eval(std::span<const std::size_t> counts) const;
  /// True when every g != h reaches the saturation level on `counts`.
  bool saturated(std::span<const std::size_t> counts) const;

 private:
  const Instance* inst_;
  std::size_t h_;
  double saturation_;
};

double eval_cover(const CoverFunction& f, std::span<const std::size_t> counts);

/// Smallest prefix length of `sequence` on which f reaches 1; nullopt when it
/// never does. Zero when f is already saturated on the empty set.
std::optional<std::size_t> cover_time(const CoverFunction& f,
                                      std::span<const std::size_t> sequence);

/// Incremental state of all f_h^B along a growing sequence.
class CoverageState {
 public:
  CoverageState(const Instance& inst, double saturation);

  double value(std::size_t h) const;
  bool covered(std::size_t h) const;
  bool all_covered() const { return uncovered_count_ == 0; }

  /// Greedy score of appending a:
  ///   sum_{h uncovered} pi(h) (f_h(S+a) - f_h(S)) / (1 - f_h(S)).
  double score(std::size_t a) const;
  /// Secondary key for ties: total d(g,h;a) over the pairs that are not yet
  /// saturated, or over all pairs once everything is covered.
  double tie_key(std::size_t a) const;

  /// Appends a; returns the hypotheses that became covered.
  std::vector<std::size_t> add(std::size_t a);

 private:
  double pair_sum(std::size_t g, std::size_t h) const { return acc_[g * num_h_ + h]; }

  const Instance* inst_;
  double saturation_;
  std::size_t num_h_;
  std::vector<double> acc_;
  std::vector<char> covered_;
  std::size_t uncovered_count_ = 0;
};

/// Greedy SFR output: the ranked actions and each hypothesis' cover time.
struct RankedSequence {
  std::vector<std::size_t> actions;
  /// CT(f_h^B, sigma) per hypothesis; nullopt when never covered.
  std::vector<std::optional<std::size_t>> cover_times;
  /// Hypotheses left uncovered when the copies ran out.
  std::vector<std::size_t> uncovered;

  bool feasible() const { return uncovered.empty(); }
  /// sum_h pi(h) CT_h; +inf if any hypothesis is uncovered.
  double weighted_cover_time(const Instance& inst) const;
};

nlohmann::json ranked_sequence_to_json(const RankedSequence& seq, const Instance& inst);

/// Index of the best action for the next greedy step among `candidates`:
/// highest score, then highest tie key, then lowest index.
std::size_t greedy_choice(const CoverageState& state, std::span<const std::size_t> candidates);

/// Weighted greedy over the ground set holding M copies of every action.
/// Stops once every f_h^B is covered or no remaining copy makes progress.
RankedSequence gre_rank(const Instance& inst, double saturation, std::size_t multiplicity);

/// Greedy with replacement for exactly `steps` picks; after full coverage the
/// tie rule keeps choosing the same action.
RankedSequence gre_rank_with_replacement(const Instance& inst, double saturation,
                                         std::size_t steps);

/// ceil(s^-1 |H|^2 ln(|H|/delta)); 1 when |H| = 1.
std::size_t default_multiplicity(const Instance& inst, double delta);

/// Smallest strictly positive increment f_h(S+u) - f_h(S) over every f_h, every
/// sub-multiset S of the M-copy ground set and every u with a copy left.
/// Exact enumeration; throws SizeGuardError beyond `max_states` multisets.
double min_marginal_epsilon(const Instance& inst, double saturation, std::size_t multiplicity,
                            std::size_t max_states = std::size_t{1} << 22);

}  // namespace asht
