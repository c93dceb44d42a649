#include "asht/fuzz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asht/error.hpp"

namespace asht {

LpInstance random_lp_instance(RandomStream& rng, std::size_t max_n, double d_max) {
  LpInstance lp;
  const std::size_t n = 1 + rng.uniform_index(max_n);
  lp.d.resize(n);
  for (auto& v : lp.d) v = d_max * (1.0 - rng.uniform());
  lp.t = rng.uniform_index(n + 1);
  return lp;
}

std::vector<double> random_prior(RandomStream& rng, std::size_t n) {
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) {
    v = 0.1 + rng.uniform();
    total += v;
  }
  for (auto& v : p) v /= total;
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) rest -= p[i];
  p.back() = rest;
  return p;
}

SfrCase random_sfr_case(RandomStream& rng, std::size_t max_ground) {
  const std::size_t num_h = 2 + rng.uniform_index(3);
  const std::size_t num_a = 1 + rng.uniform_index(std::min<std::size_t>(3, max_ground));
  const std::size_t multiplicity = 1 + rng.uniform_index(max_ground / num_a);
  while (true) {
    Instance base = generate_synthetic(num_h, num_a, SyntheticMode::grid(8), rng());
    InstanceData data = base.data();
    data.prior = random_prior(rng, num_h);
    Instance inst = Instance::create(std::move(data));
    // Smallest pair total over the full ground set.
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < num_h; ++g) {
      for (std::size_t h = 0; h < num_h; ++h) {
        if (g == h) continue;
        double total = 0.0;
        for (std::size_t a = 0; a < num_a; ++a) total += inst.divergence(g, h, a);
        floor = std::min(floor, total * static_cast<double>(multiplicity));
      }
    }
    if (!(floor > 0.0)) continue;
    const double saturation = floor * (0.05 + 0.95 * rng.uniform());
    return {std::move(inst), saturation, multiplicity};
  }
}

Instance random_deterministic_instance(RandomStream& rng, std::size_t max_h) {
  const std::size_t num_h = 2 + rng.uniform_index(max_h - 1);
  // Grid(4) has 3 values per action; leave room for distinct rows.
  std::size_t min_a = 2, rows = 9;
  while (rows < 2 * num_h) {
    ++min_a;
    rows *= 3;
  }
  const std::size_t num_a = min_a + rng.uniform_index(9 - min_a);
  return generate_synthetic(num_h, num_a, SyntheticMode::grid(4), rng());
}

PlanCase random_plan_case(RandomStream& rng, std::size_t max_length) {
  while (true) {
    const std::size_t num_h = 2 + rng.uniform_index(2);
    const std::size_t num_a = 1 + rng.uniform_index(3);
    Instance inst = generate_synthetic(num_h, num_a, SyntheticMode::grid(8), rng());
    RnBParams p;
    p.delta = 0.25;
    p.boost = 1 + rng.uniform_index(2);
    p.saturation = 0.5 * std::log(1.0 / p.delta) * (0.2 + 0.8 * rng.uniform());
    p.multiplicity = 1 + rng.uniform_index(4);
    const RnBPlan plan = build_plan(inst, p);
    if (plan.boosted.empty() || plan.boosted.size() > max_length) continue;
    return {std::move(inst), p};
  }
}

std::vector<std::vector<double>> random_matrix(RandomStream& rng, std::size_t rows,
                                               std::size_t cols) {
  std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
  for (auto& r : m) {
    for (auto& v : r) v = rng.uniform_index(5) == 0 ? 0.0 : rng.uniform();
  }
  return m;
}

}  // namespace asht
