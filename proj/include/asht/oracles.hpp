#pragma once

#include <cstddef>
#include <vector>

#include "asht/instance.hpp"
#include "asht/rnb.hpp"
#include "asht/simulation.hpp"

namespace asht {

/// LP(d,t): min sum_i i z_i over the simplex on {1..N} subject to
/// sum_i d^i z_i >= d^t, where d^i are the prefix sums of d.
struct LpInstance {
  std::vector<double> d;
  std::size_t t = 0;
};

/// Two-point closed form: 1 for t = 0, N for t = N, otherwise
/// min over 1 <= i <= t < j <= N of i + (j-i)(d^t - d^i)/(d^j - d^i).
double lp_closed_form(const LpInstance& lp);
/// The same LP handed to the generic simplex.
double lp_simplex(const LpInstance& lp);
/// lp_closed_form(lp) >= t * min_i d_i.
bool lp_lower_bound_check(const LpInstance& lp);

struct SfrOptimum {
  /// An optimal ordering of the M-copy ground set.
  std::vector<std::size_t> sequence;
  /// sum_h pi(h) CT(f_h^B, sequence); +inf when no ordering covers every h.
  double weighted_cover_time = 0.0;
};

/// Exhaustive search over the distinct orderings of the ground set holding M
/// copies of each action. Throws SizeGuardError when |A| * M > max_ground.
SfrOptimum brute_force_sfr(const Instance& inst, double saturation, std::size_t multiplicity,
                           std::size_t max_ground = 8);

/// Optimal expected cost of identifying h with the noiseless tests
/// T_a(h) = mu(h,a), by DP over hypothesis subsets. Throws SizeGuardError
/// beyond max_h hypotheses and ValidationError on an unsplittable subset.
double brute_force_odt(const Instance& inst, std::size_t max_h = 12);
/// Same DP started from a subset, given as a bitmask.
double brute_force_odt_subset(const Instance& inst, std::uint64_t subset, std::size_t max_h = 12);

struct ExactPlanCost {
  /// E_h[cost] per hypothesis.
  std::vector<double> expected_cost;
  /// Var_h[cost] per hypothesis.
  std::vector<double> cost_variance;
  /// P_h[output != h].
  std::vector<double> error;
  /// Total probability over enumerated leaves; 1 up to rounding.
  std::vector<double> mass;
};

/// Exact cost and error of the timestamp rule, by enumerating every outcome
/// string. Bernoulli only; throws SizeGuardError when the boosted sequence is
/// longer than max_length.
ExactPlanCost exact_policy_cost(const Instance& inst, const RnBPlan& plan,
                                std::size_t max_length = 22);

/// max over lambda in the simplex of min_p sum_a lambda(a) rows[p][a] by
/// enumerating every vertex of {(lambda, v)}. For small matrices only.
double max_min_by_vertices(const std::vector<std::vector<double>>& rows);
/// The same value from the direct LP max v s.t. rows lambda >= v, 1^T lambda = 1.
double max_min_by_simplex(const std::vector<std::vector<double>>& rows);

/// Instance whose action i separates hypothesis i from the rest
/// (means 0.9 vs 0.1), n hypotheses and n-1 actions, uniform prior.
Instance one_vs_rest_instance(std::size_t n);

}  // namespace asht
