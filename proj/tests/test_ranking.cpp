#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "asht/fuzz.hpp"
#include "asht/oracles.hpp"
#include "asht/ranking.hpp"
#include "helpers.hpp"

using namespace asht;
using asht::testing::make_instance;

namespace {

// Gaussian means whose divergence from 0 is d.
double gap(double d) { return std::sqrt(2.0 * d); }

Instance gaussian(std::vector<std::vector<double>> means) {
  return make_instance(std::move(means), OutcomeFamily::unit_gaussian());
}

}  // namespace

TEST_CASE("eval_cover hand examples") {
  // h = 0 against g1, g2 on one action with d = 1 and 4.
  const Instance inst = gaussian({{0.0}, {gap(1.0)}, {gap(4.0)}});
  const CoverFunction f(inst, 0, 2.0);
  const std::vector<std::size_t> none{0}, one{1}, many{5};
  CHECK(eval_cover(f, none) == 0.0);
  CHECK(eval_cover(f, one) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(eval_cover(f, many) == 1.0);
  CHECK(f.saturated(many));
  CHECK_FALSE(f.saturated(one));
}

TEST_CASE("cover_time prefix crossing") {
  const Instance inst = gaussian({{0.0, 0.0}, {gap(0.4), gap(0.7)}});
  const CoverFunction f(inst, 0, 1.0);
  const std::vector<std::size_t> seq{0, 1};
  CHECK(cover_time(f, seq) == 2u);
  const std::vector<std::size_t> first{1, 1};
  CHECK(cover_time(CoverFunction(inst, 0, 0.7), first) == 1u);
  const std::vector<std::size_t> short_seq{0};
  CHECK_FALSE(cover_time(f, short_seq).has_value());
}

TEST_CASE("zero divergence pair is never covered") {
  const Instance inst = gaussian({{0.0, 0.0}, {0.0, 1.0}});
  const CoverFunction f(inst, 0, 0.5);
  const std::vector<std::size_t> seq{0, 0, 0, 0};
  CHECK_FALSE(cover_time(f, seq).has_value());
}

TEST_CASE("gre_rank small cases") {
  SUBCASE("first pick is the most informative action") {
    const Instance inst = gaussian({{0.0, 0.0}, {gap(1.0), gap(0.2)}});
    const auto seq = gre_rank(inst, 1.0, 3);
    REQUIRE_FALSE(seq.actions.empty());
    CHECK(seq.actions.front() == 0);
    CHECK(seq.feasible());
  }
  SUBCASE("exhausted copies report uncovered hypotheses") {
    const Instance inst = gaussian({{0.0}, {gap(0.2)}});
    const auto seq = gre_rank(inst, 1.0, 2);
    CHECK_FALSE(seq.feasible());
    CHECK(seq.uncovered == std::vector<std::size_t>{0, 1});
    CHECK(seq.actions.size() == 2);
  }
  SUBCASE("ties go to the larger divergence sum, then the lower index") {
    // Both actions saturate in one step; action 1 has the larger raw divergence.
    const Instance inst = gaussian({{0.0, 0.0, 0.0}, {gap(2.0), gap(3.0), gap(3.0)}});
    CHECK(gre_rank(inst, 1.0, 1).actions.front() == 1);
  }
}

TEST_CASE("gre_rank with one hypothesis is empty") {
  const Instance inst = make_instance({{0.3, 0.6}});
  const auto seq = gre_rank(inst, 1.0, 4);
  CHECK(seq.actions.empty());
  CHECK(seq.feasible());
}

TEST_CASE("greedy choice dominates every alternative at every step") {
  auto rng = RandomStream(11);
  for (int i = 0; i < 40; ++i) {
    const SfrCase k = random_sfr_case(rng, 6);
    const auto seq = gre_rank(k.instance, k.saturation, k.multiplicity);
    CoverageState state(k.instance, k.saturation);
    std::vector<std::size_t> used(k.instance.num_actions(), 0);
    for (auto a : seq.actions) {
      const double chosen = state.score(a);
      for (std::size_t b = 0; b < used.size(); ++b) {
        if (used[b] < k.multiplicity) CHECK(chosen >= state.score(b) - 1e-15);
      }
      ++used[a];
      CHECK(used[a] <= k.multiplicity);
      state.add(a);
    }
  }
}

TEST_CASE("coverage never decreases along a sequence") {
  auto rng = RandomStream(12);
  for (int i = 0; i < 40; ++i) {
    const SfrCase k = random_sfr_case(rng, 6);
    const auto seq = gre_rank(k.instance, k.saturation, k.multiplicity);
    for (std::size_t h = 0; h < k.instance.num_hypotheses(); ++h) {
      const CoverFunction f(k.instance, h, k.saturation);
      std::vector<std::size_t> counts(k.instance.num_actions(), 0);
      double last = eval_cover(f, counts);
      CHECK(last == 0.0);
      for (auto a : seq.actions) {
        ++counts[a];
        const double now = eval_cover(f, counts);
        CHECK(now >= last);
        CHECK(now <= 1.0);
        last = now;
      }
      if (seq.cover_times[h]) {
        CHECK(cover_time(f, std::span(seq.actions)) == seq.cover_times[h]);
      }
    }
  }
}

TEST_CASE("greedy is never better than the exhaustive optimum") {
  auto rng = RandomStream(13);
  for (int i = 0; i < 30; ++i) {
    const SfrCase k = random_sfr_case(rng, 6);
    const double greedy =
        gre_rank(k.instance, k.saturation, k.multiplicity).weighted_cover_time(k.instance);
    const auto opt = brute_force_sfr(k.instance, k.saturation, k.multiplicity);
    CHECK(greedy >= opt.weighted_cover_time - 1e-12);
  }
}

TEST_CASE("with-replacement ranking") {
  const Instance inst = gaussian({{0.0, 0.0}, {gap(1.0), gap(0.2)}, {gap(0.5), gap(2.0)}});
  const auto one = gre_rank_with_replacement(inst, 1.0, 1);
  REQUIRE(one.actions.size() == 1);
  CoverageState state(inst, 1.0);
  const std::vector<std::size_t> all{0, 1};
  CHECK(one.actions.front() == greedy_choice(state, all));
  const auto many = gre_rank_with_replacement(inst, 50.0, 30);
  CHECK(many.actions.size() == 30);
}

TEST_CASE("default multiplicity") {
  // Gaps of one give s = 0.5: M = ceil(2 * 16 * ln 40) = 119.
  const Instance inst = gaussian({{0.0}, {1.0}, {2.0}, {3.0}});
  CHECK(default_multiplicity(inst, 0.1) == 119);
}

TEST_CASE("min marginal epsilon") {
  SUBCASE("single pair saturating in one step") {
    const Instance inst = gaussian({{0.0}, {gap(2.0)}});
    CHECK(min_marginal_epsilon(inst, 1.0, 3) == 1.0);
  }
  SUBCASE("two hypotheses with equal divergences") {
    const Instance inst = gaussian({{0.0, 0.0}, {gap(0.3), gap(0.3)}});
    // B >= d0 * |sigma| with |sigma| = 4.
    CHECK(min_marginal_epsilon(inst, 1.2, 2) == doctest::Approx(0.3 / 1.2).epsilon(1e-12));
  }
  SUBCASE("matches an exhaustive scan") {
    auto rng = RandomStream(14);
    for (int i = 0; i < 20; ++i) {
      const SfrCase k = random_sfr_case(rng, 6);
      const std::size_t num_a = k.instance.num_actions();
      double best = INFINITY;
      std::vector<std::size_t> counts(num_a, 0);
      // Odometer over all count vectors up to the multiplicity.
      while (true) {
        for (std::size_t h = 0; h < k.instance.num_hypotheses(); ++h) {
          const CoverFunction f(k.instance, h, k.saturation);
          const double base = eval_cover(f, counts);
          for (std::size_t u = 0; u < num_a; ++u) {
            if (counts[u] == k.multiplicity) continue;
            auto next = counts;
            ++next[u];
            const double inc = eval_cover(f, next) - base;
            if (inc > 1e-15) best = std::min(best, inc);
          }
        }
        std::size_t pos = 0;
        while (pos < num_a && counts[pos] == k.multiplicity) counts[pos++] = 0;
        if (pos == num_a) break;
        ++counts[pos];
      }
      CHECK(min_marginal_epsilon(k.instance, k.saturation, k.multiplicity) ==
            doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("ranked sequence json") {
  const Instance inst = gaussian({{0.0, 0.0}, {gap(1.0), gap(0.2)}});
  const auto seq = gre_rank(inst, 1.0, 2);
  const auto j = ranked_sequence_to_json(seq, inst);
  CHECK(j.at("actions")[0] == "a0");
  CHECK(j.at("cover_times").size() == 2);
}
