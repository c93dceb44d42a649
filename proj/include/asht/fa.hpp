#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "asht/alive_set.hpp"
#include "asht/instance.hpp"
#include "asht/simulation.hpp"

namespace asht {

/// Action a repeated k times; the outcome is summarized by the empirical mean.
struct MetaTest {
  std::size_t action = 0;
  std::size_t repetitions = 1;
  double cost = 0.0;
};

/// min over outcomes omega of |alive \ T_a^omega|, where T_a^omega holds the
/// hypotheses with mu(h,a) = omega.
std::size_t worst_case_elimination(const Instance& inst, const AliveSet& alive, std::size_t a);

/// sum over ordered pairs h != g in alive of KL(mu(h,a) || mu(g,a)).
double alive_pair_divergence(const Instance& inst, const AliveSet& alive, std::size_t a);

/// argmax_a worst_case_elimination, ties by alive_pair_divergence then lowest
/// index. Throws ValidationError when no action splits `alive`.
std::size_t odt_greedy_step(const Instance& inst, const AliveSet& alive);

/// ceil(ln(|H|/delta) / s(a)).
std::size_t theory_boost_count(double s_a, std::size_t num_h, double delta);

/// Closest value in `outcomes` (sorted ascending) to `mean`; ties go to the
/// smaller value.
double round_to_outcome(double mean, std::span<const double> outcomes);

/// Distinct mu(h,a) over every hypothesis, ascending.
std::vector<double> outcome_values(const Instance& inst, std::size_t a);

struct TheoryRunResult {
  std::size_t output = 0;
  double cost = 0.0;
  std::size_t steps = 0;
  std::size_t iterations = 0;
  std::size_t recoveries = 0;
  /// |alive| after each iteration.
  std::vector<std::size_t> alive_trace;
};

/// Greedy ODT with every test boosted to ceil(ln(|H|/delta)/s(a)) repeats
/// and the empirical mean rounded to the nearest outcome. An empty alive set
/// restarts from the full hypothesis set.
TheoryRunResult run_theory(const Instance& inst, double delta, OutcomeSource& source);

/// Expected cost of the noiseless greedy decision tree under the prior.
double greedy_tree_cost(const Instance& inst);

struct FaExperimentParams {
  std::size_t k_max = 5;
  double C = 0.5;
  double delta = 0.05;

  void validate() const;
};

/// Best meta-test T_{a,k} for the current posterior.
MetaTest fa_experiment_step(const Instance& inst, std::span<const double> posterior,
                            const FaExperimentParams& params);

class FaTheoryPolicy final : public Policy {
 public:
  FaTheoryPolicy(const Instance& inst, double delta);

  std::string name() const override { return "fa"; }
  std::size_t run(OutcomeSource& source, RandomStream& rng) const override;

 private:
  const Instance* inst_;
  double delta_;
};

/// FA(k_max, delta): soft elimination on the posterior, meta-test scores
/// served from precomputed elimination sets.
class FaExperimentPolicy final : public Policy {
 public:
  FaExperimentPolicy(const Instance& inst, FaExperimentParams params);

  std::string name() const override { return "fa-exp"; }
  std::size_t run(OutcomeSource& source, RandomStream& rng) const override;
  /// Same choice as fa_experiment_step, from the precomputed tables.
  MetaTest step(std::span<const double> posterior) const;
  /// Elimination set of T_{a,k} at grid mean m/k.
  const AliveSet& mask(std::size_t a, std::size_t k, std::size_t m) const {
    return masks_[offset_[a * params_.k_max + (k - 1)] + m];
  }

 private:

  const Instance* inst_;
  FaExperimentParams params_;
  std::vector<std::size_t> offset_;
  std::vector<AliveSet> masks_;
};

}  // namespace asht
