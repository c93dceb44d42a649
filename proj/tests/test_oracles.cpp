#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "asht/error.hpp"
#include "asht/fa.hpp"
#include "asht/fuzz.hpp"
#include "asht/oracles.hpp"
#include "asht/rnb.hpp"
#include "asht/simplex.hpp"
#include "asht/verify.hpp"
#include "helpers.hpp"

using namespace asht;
using asht::testing::make_instance;

namespace {

LinearConstraint row(std::vector<double> c, Relation rel, double rhs) { return {std::move(c), rel, rhs}; }

}  // namespace

TEST_CASE("simplex on a textbook problem") {
  LinearProgram lp{{1.0, 1.0}, true,
                   {row({1, 2}, Relation::LessEqual, 4), row({3, 1}, Relation::LessEqual, 6)}};
  for (auto rule : {PivotRule::Bland, PivotRule::Dantzig}) {
    const auto s = solve_lp(lp, rule);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(2.8).epsilon(1e-12));
    CHECK(s.x[0] == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(s.x[1] == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(s.duals[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(s.duals[1] == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("simplex status reporting") {
  const LinearProgram infeasible{{1.0}, true,
                                 {row({1}, Relation::GreaterEqual, 2), row({1}, Relation::LessEqual, 1)}};
  CHECK(solve_lp(infeasible).status == LpStatus::Infeasible);
  const LinearProgram unbounded{{1.0, 0.0}, true, {row({1, -1}, Relation::LessEqual, 1)}};
  CHECK(solve_lp(unbounded).status == LpStatus::Unbounded);
  const LinearProgram equality{{1.0, 1.0}, false, {row({1, 1}, Relation::Equal, 3)}};
  const auto s = solve_lp(equality);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0));
  const LinearProgram negative{{1.0}, false, {row({-1}, Relation::LessEqual, -2)}};
  CHECK(solve_lp(negative).objective == doctest::Approx(2.0));
}

TEST_CASE("simplex terminates on a cycling-prone problem") {
  // Beale's example; optimum -5/4.
  const LinearProgram lp{{-0.75, 20, -0.5, 6},
                         false,
                         {row({0.25, -8, -1, 9}, Relation::LessEqual, 0),
                          row({0.5, -12, -0.5, 3}, Relation::LessEqual, 0),
                          row({0, 0, 1, 0}, Relation::LessEqual, 1)}};
  for (auto rule : {PivotRule::Bland, PivotRule::Dantzig}) {
    const auto s = solve_lp(lp, rule);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-1.25).epsilon(1e-12));
  }
}

TEST_CASE("simplex rejects ragged constraints") {
  const LinearProgram lp{{1.0, 1.0}, true, {row({1}, Relation::LessEqual, 1)}};
  CHECK_THROWS_AS(solve_lp(lp), ValidationError);
}

TEST_CASE("LP closed form") {
  CHECK(lp_closed_form({std::vector<double>(5, 0.5), 3}) == 3.0);
  CHECK(lp_closed_form({{0.3, 0.9, 2.0}, 0}) == 1.0);
  CHECK(lp_closed_form({{0.3, 0.9, 2.0}, 3}) == 3.0);
  // A virtual i = 0 would give 2 * 0.1 / 10.1 here; z lives on {1..N}.
  const LpInstance skew{{0.1, 10.0}, 1};
  CHECK(lp_closed_form(skew) == 1.0);
  CHECK(lp_simplex(skew) == doctest::Approx(1.0).epsilon(1e-12));
  auto rng = RandomStream(51);
  for (int i = 0; i < 100; ++i) {
    const LpInstance lp = random_lp_instance(rng, 10, 2.0);
    CHECK(std::abs(lp_closed_form(lp) - lp_simplex(lp)) <= 1e-9);
  }
}

TEST_CASE("LP lower bound") {
  CHECK(lp_lower_bound_check({std::vector<double>(4, 0.5), 3}));
  CHECK(lp_lower_bound_check({std::vector<double>(4, 1.0), 3}));
  CHECK(lp_lower_bound_check({{0.2, 0.4}, 0}));
  auto rng = RandomStream(52);
  for (int i = 0; i < 500; ++i) CHECK(lp_lower_bound_check(random_lp_instance(rng, 12, 1.0)));
}

TEST_CASE("SFR brute force") {
  const Instance one = make_instance({{0.2}, {0.8}});
  const auto opt = brute_force_sfr(one, 0.5, 1);
  CHECK(opt.sequence == std::vector<std::size_t>{0});
  CHECK(opt.weighted_cover_time == 1.0);
  const Instance wide = generate_synthetic(3, 3, SyntheticMode::grid(8), 1);
  CHECK_THROWS_AS(brute_force_sfr(wide, 0.5, 3), SizeGuardError);
}

TEST_CASE("ODT dynamic program") {
  CHECK(brute_force_odt(make_instance({{0.2}, {0.8}})) == 1.0);
  CHECK(brute_force_odt(make_instance({{0.2}, {0.8}}, OutcomeFamily::bernoulli(), {}, {2.5})) ==
        2.5);
  for (std::size_t n = 2; n <= 8; ++n) {
    const double want = (n + 2.0) * (n - 1.0) / (2.0 * n);
    CHECK(std::abs(brute_force_odt(one_vs_rest_instance(n)) - want) <= 1e-12);
  }
  CHECK(std::abs(brute_force_odt(one_vs_rest_instance(4)) - 2.25) <= 1e-12);
  CHECK_THROWS_AS(brute_force_odt(one_vs_rest_instance(13)), SizeGuardError);
  auto rng = RandomStream(53);
  for (int i = 0; i < 50; ++i) {
    const Instance inst = random_deterministic_instance(rng, 10);
    const double opt = brute_force_odt(inst);
    const double greedy = greedy_tree_cost(inst);
    CHECK(greedy >= opt - 1e-12);
    CHECK(greedy <= 4 * opt);
  }
}

TEST_CASE("exact plan cost") {
  SUBCASE("empty plan on one hypothesis") {
    const Instance inst = make_instance({{0.3}});
    RnBPlan plan;
    plan.timestamps = {std::size_t{0}};
    const auto e = exact_policy_cost(inst, plan);
    CHECK(e.expected_cost == std::vector<double>{0.0});
    CHECK(e.error == std::vector<double>{0.0});
  }
  SUBCASE("near-deterministic outcomes stop at the timestamp") {
    const Instance inst = make_instance({{0.001, 0.999}, {0.999, 0.001}, {0.999, 0.999}});
    RnBParams p;
    p.saturation = 1.0;
    p.boost = 1;
    p.delta = 0.1;
    p.multiplicity = 2;
    const RnBPlan plan = build_plan(inst, p);
    const auto e = exact_policy_cost(inst, plan);
    for (std::size_t h = 0; h < 3; ++h) {
      CHECK(e.error[h] <= 0.01);
      REQUIRE(plan.timestamps[h]);
      CHECK(e.expected_cost[h] == doctest::Approx(static_cast<double>(*plan.timestamps[h])).epsilon(0.01));
      CHECK(std::abs(e.mass[h] - 1.0) <= 1e-12);
    }
  }
  SUBCASE("guards") {
    const Instance inst = make_instance({{0.3}, {0.6}});
    RnBPlan plan;
    plan.ranked = {0};
    plan.boosted.assign(23, 0);
    plan.boost = 23;
    plan.saturation = 1.0;
    plan.timestamps = {std::size_t{23}, std::size_t{23}};
    CHECK_THROWS_AS(exact_policy_cost(inst, plan), SizeGuardError);
    const Instance gauss = make_instance({{0.0}, {1.0}}, OutcomeFamily::unit_gaussian());
    plan.boosted.assign(2, 0);
    CHECK_THROWS_AS(exact_policy_cost(gauss, plan), ValidationError);
  }
}

TEST_CASE("verification suite") {
  const auto checks = run_verification(VerifyOptions{1, 0.0});
  for (const auto& c : checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
    CHECK(c.cases > 0);
  }
  const auto again = run_verification(VerifyOptions{1, 0.0});
  CHECK(verification_to_json(VerifyOptions{1, 0.0}, checks) ==
        verification_to_json(VerifyOptions{1, 0.0}, again));
}

TEST_CASE("an injected LP perturbation is reported") {
  const auto checks = run_verification(VerifyOptions{2, 1e-6});
  const auto j = verification_to_json(VerifyOptions{2, 1e-6}, checks);
  CHECK_FALSE(j.at("passed").get<bool>());
  for (const auto& c : checks) {
    if (c.name == "lp_closed_form_vs_simplex") {
      CHECK_FALSE(c.passed);
      CHECK(c.failures == c.cases);
    } else {
      CHECK(c.passed);
    }
  }
}
