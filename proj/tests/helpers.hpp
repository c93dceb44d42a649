#pragma once

#include <string>
#include <vector>

#include "asht/instance.hpp"

namespace asht::testing {

/// Instance with uniform prior and unit costs unless given.
inline Instance make_instance(std::vector<std::vector<double>> means,
                              OutcomeFamily family = OutcomeFamily::bernoulli(),
                              std::vector<double> prior = {}, std::vector<double> costs = {}) {
  InstanceData d;
  d.family = family;
  const std::size_t num_h = means.size();
  const std::size_t num_a = means.front().size();
  for (std::size_t h = 0; h < num_h; ++h) d.hypotheses.push_back("h" + std::to_string(h));
  for (std::size_t a = 0; a < num_a; ++a) d.actions.push_back("a" + std::to_string(a));
  d.prior = prior.empty() ? std::vector<double>(num_h, 1.0 / num_h) : prior;
  d.costs = costs.empty() ? std::vector<double>(num_a, 1.0) : costs;
  d.means = std::move(means);
  return Instance::create(std::move(d));
}

}  // namespace asht::testing
