#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "asht/error.hpp"
#include "asht/fuzz.hpp"
#include "asht/rnb.hpp"
#include "helpers.hpp"

using namespace asht;
using asht::testing::make_instance;

TEST_CASE("default parameters") {
  const Instance inst = generate_synthetic(100, 12, SyntheticMode::uniform01(), 4);
  const RnBParams p = RnBParams::defaults(inst, 0.01);
  CHECK(p.boost == 2);
  CHECK(p.saturation == doctest::Approx(0.5 * std::log(100.0)).epsilon(1e-12));
  CHECK(p.saturation == doctest::Approx(2.3026).epsilon(1e-4));
  CHECK_NOTHROW(p.validate());

  RnBParams bad = p;
  bad.saturation = 3.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.delta = 0.3;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("unit boosting leaves the ranked sequence unchanged") {
  const Instance inst = generate_synthetic(4, 5, SyntheticMode::grid(8), 2);
  RnBParams p = RnBParams::defaults(inst, 0.2);
  p.boost = 1;
  p.multiplicity = 3;
  const RnBPlan plan = build_plan(inst, p);
  CHECK(plan.boosted == plan.ranked);
  const auto seq = gre_rank(inst, p.saturation, p.multiplicity);
  for (std::size_t h = 0; h < inst.num_hypotheses(); ++h) {
    CHECK(plan.timestamps[h] == seq.cover_times[h]);
  }
}

TEST_CASE("boosted sequence repeats each ranked action in blocks") {
  auto rng = RandomStream(21);
  for (int i = 0; i < 30; ++i) {
    const PlanCase k = random_plan_case(rng, 22);
    const RnBPlan plan = build_plan(k.instance, k.params);
    const std::size_t alpha = plan.boost;
    REQUIRE(plan.boosted.size() == alpha * plan.ranked.size());
    for (std::size_t t = 0; t < plan.ranked.size(); ++t) {
      for (std::size_t r = 0; r < alpha; ++r) CHECK(plan.boosted[alpha * t + r] == plan.ranked[t]);
    }
    for (const auto& ts : plan.timestamps) {
      if (ts) CHECK(*ts % alpha == 0);
    }
  }
}

TEST_CASE("single hypothesis returns immediately") {
  const Instance inst = make_instance({{0.3, 0.7}});
  RnBParams p;
  p.saturation = 0.5;
  p.boost = 2;
  p.delta = 0.1;
  p.multiplicity = 2;
  const RnBPlan plan = build_plan(inst, p);
  CHECK(plan.boosted.empty());
  ScriptedSource src({});
  const auto res = execute(plan, inst, src);
  CHECK(res.output == 0);
  CHECK(res.cost == 0.0);
  CHECK(res.steps == 0);
}

TEST_CASE("mean log-likelihood ratio per step approaches the divergence") {
  const Instance inst = make_instance({{0.2}, {0.8}});
  auto rng = RandomStream(5);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = sample_outcome(inst.family(), 0.8, rng);
    const double inc = log_likelihood(inst.family(), 0.8, y) - log_likelihood(inst.family(), 0.2, y);
    sum += inc;
    sum2 += inc * inc;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - inst.divergence(1, 0, 0)) <= 3 * se);
  CHECK(inst.divergence(1, 0, 0) == doctest::Approx(0.8318).epsilon(1e-4));
}

TEST_CASE("stopping decision depends only on past outcomes") {
  auto rng = RandomStream(22);
  for (int i = 0; i < 40; ++i) {
    const PlanCase k = random_plan_case(rng, 22);
    const RnBPlan plan = build_plan(k.instance, k.params);
    std::vector<double> outcomes(plan.boosted.size());
    for (auto& y : outcomes) y = rng.uniform() < 0.5 ? 0.0 : 1.0;
    ScriptedSource first(outcomes);
    const auto a = execute(plan, k.instance, first);
    auto mutated = outcomes;
    for (std::size_t t = a.steps; t < mutated.size(); ++t) mutated[t] = 1.0 - mutated[t];
    ScriptedSource second(mutated);
    const auto b = execute(plan, k.instance, second);
    CHECK(a.steps == b.steps);
    if (a.triggered) {
      CHECK(b.triggered);
      CHECK(a.output == b.output);
      // Uniform costs: cost is the stop index, a multiple of alpha.
      CHECK(a.cost == static_cast<double>(a.steps));
      CHECK(a.steps % plan.boost == 0);
    }
  }
}

TEST_CASE("exhausted scan falls back to the posterior argmax") {
  // Saturation far above anything a one-copy plan can reach leaves no timestamps.
  const Instance inst = make_instance({{0.2, 0.5}, {0.8, 0.5}});
  RnBPlan plan;
  plan.ranked = {0};
  plan.boosted = {0, 0};
  plan.boost = 2;
  plan.saturation = 1.0;
  plan.timestamps = {std::size_t{2}, std::size_t{2}};
  ScriptedSource src({1.0, 0.0});
  const auto res = execute(plan, inst, src);
  CHECK_FALSE(res.triggered);
  CHECK(res.steps == 2);
  // Equal likelihoods: ties go to the lower index.
  CHECK(res.output == 0);
}

TEST_CASE("experiment plan") {
  const Instance inst = generate_synthetic(6, 8, SyntheticMode::uniform01(), 9);
  SUBCASE("one step is the single best action") {
    const RnBPlan plan = build_plan_experiment(inst, 1.0, 1);
    REQUIRE(plan.ranked.size() == 1);
    CoverageState state(inst, 1.0);
    std::vector<std::size_t> all(inst.num_actions());
    for (std::size_t a = 0; a < all.size(); ++a) all[a] = a;
    CHECK(plan.ranked.front() == greedy_choice(state, all));
  }
  SUBCASE("truncation at the last first occurrence") {
    CHECK(first_occurrence_prefix({2, 2, 0, 2, 1, 0, 1}) == 5);
    CHECK(first_occurrence_prefix({3}) == 1);
    CHECK(first_occurrence_prefix({}) == 0);
    const RnBPlan plan = build_plan_experiment(inst, std::log(6 / 0.05), 800);
    CHECK(plan.ranked.size() <= 800);
    CHECK(first_occurrence_prefix(plan.ranked) == plan.ranked.size());
  }
}

TEST_CASE("posterior execution cycles through the sequence") {
  const Instance inst = make_instance({{0.45, 0.5}, {0.55, 0.5}});
  RnBPlan plan;
  plan.ranked = {0};
  plan.boosted = {0};
  TrialEnvironment env(inst, 1, RandomStream(9));
  const auto res = execute_posterior(plan, inst, 0.05, env);
  CHECK(res.steps > 1);
  CHECK(res.output < 2);
}

TEST_CASE("plan json") {
  const Instance inst = generate_synthetic(4, 5, SyntheticMode::grid(8), 2);
  const RnBPlan plan = build_plan(inst, RnBParams::defaults(inst, 0.1));
  const auto j = plan_to_json(plan, inst);
  CHECK(j.at("alpha") == plan.boost);
  CHECK(j.at("boosted_length") == plan.boosted.size());
  CHECK(j.contains("timestamps"));
}
