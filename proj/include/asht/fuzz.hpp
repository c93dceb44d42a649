#pragma once

#include <cstddef>
#include <vector>

#include "asht/instance.hpp"
#include "asht/oracles.hpp"
#include "asht/rnb.hpp"
#include "asht/simulation.hpp"

namespace asht {

/// N in [1, max_n], d_i uniform on (0, d_max], t uniform on {0..N}.
LpInstance random_lp_instance(RandomStream& rng, std::size_t max_n, double d_max);

/// Random positive prior of length n.
std::vector<double> random_prior(RandomStream& rng, std::size_t n);

struct SfrCase {
  Instance instance;
  double saturation;
  std::size_t multiplicity;
};

/// |H| in {2,3,4}, grid(8) means, random prior, |A| * M <= max_ground and B
/// chosen so that the full ground set covers every hypothesis.
SfrCase random_sfr_case(RandomStream& rng, std::size_t max_ground = 6);

/// Unit-cost grid(4) instance with uniform prior, |H| in [2, max_h] and
/// |A| in [2, 8]; the means act as deterministic test outcomes.
Instance random_deterministic_instance(RandomStream& rng, std::size_t max_h);

struct PlanCase {
  Instance instance;
  RnBParams params;
};

/// Small Bernoulli instance and RnB parameters whose boosted sequence has at
/// most max_length entries.
PlanCase random_plan_case(RandomStream& rng, std::size_t max_length = 22);

/// rows x cols matrix with entries uniform on [0, 1), one in five set to 0.
std::vector<std::vector<double>> random_matrix(RandomStream& rng, std::size_t rows,
                                               std::size_t cols);

}  // namespace asht
