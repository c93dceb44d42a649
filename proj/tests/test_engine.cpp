#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "asht/baselines.hpp"
#include "asht/engine.hpp"
#include "asht/error.hpp"
#include "asht/fa.hpp"
#include "asht/fuzz.hpp"
#include "asht/policies.hpp"
#include "helpers.hpp"

using namespace asht;
using asht::testing::make_instance;

TEST_CASE("random streams") {
  RandomStream a(5), b(5), c(6);
  for (int i = 0; i < 20; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  CHECK(derive_seed({1, 2}) != derive_seed({2, 1}));
  CHECK(derive_seed({1, 2}) == derive_seed({1, 2}));
  CHECK(derive_seed({1, 2}) != derive_seed({1, 2, 0}));
  RandomStream u(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.uniform_index(3) < 3);
  }
}

TEST_CASE("bernoulli sampling") {
  RandomStream rng(8);
  for (int i = 0; i < 1000; ++i) CHECK(sample_outcome(OutcomeFamily::bernoulli(), 0.0, rng) == 0.0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = sample_outcome(OutcomeFamily::bernoulli(), 0.7, rng);
    CHECK((y == 0.0 || y == 1.0));
    sum += y;
  }
  CHECK(std::abs(sum / n - 0.7) <= 3 * std::sqrt(0.21 / n));
}

TEST_CASE("gaussian sampling") {
  RandomStream rng(9);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = sample_outcome(OutcomeFamily::unit_gaussian(), 2.0, rng);
    sum += y;
    sum2 += y * y;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - 2.0) <= 3 * std::pow(10.0, -2.5));
  CHECK(std::abs(var - 1.0) <= 0.02);
}

TEST_CASE("bayes update") {
  const Instance inst = make_instance({{0.9, 0.5}, {0.1, 0.5}});
  const PosteriorState prior(inst.prior());
  SUBCASE("outcome 1") {
    const auto post = bayes_update(prior, inst, 0, 1.0);
    CHECK(post.probability(0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(post.probability(1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(post.argmax() == 0);
  }
  SUBCASE("outcome 0") {
    const auto post = bayes_update(prior, inst, 0, 0.0);
    CHECK(post.probability(0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(post.probability(1) == doctest::Approx(0.9).epsilon(1e-12));
  }
  SUBCASE("uninformative action") {
    const auto post = bayes_update(prior, inst, 1, 1.0);
    CHECK(post.probability(0) == 0.5);
    CHECK(post.probability(1) == 0.5);
  }
  SUBCASE("impossible outcome everywhere is a numerical error") {
    const Instance hard = make_instance({{0.0, 0.2}, {0.0, 0.7}});
    PosteriorState p(hard.prior());
    CHECK_THROWS_AS(p.update(hard, 0, 1.0), NumericalError);
  }
}

TEST_CASE("posterior stays normalized with positive mass") {
  const Instance inst = generate_synthetic(8, 5, SyntheticMode::uniform01(), 10);
  PosteriorState post(inst.prior());
  RandomStream rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::size_t a = rng.uniform_index(5);
    post.update(inst, a, sample_outcome(inst.family(), inst.mean(2, a), rng));
    double total = 0.0;
    for (double p : post.probabilities()) total += p;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
  CHECK(post.observations() == 300);
}

TEST_CASE("trial environment accounts cost and enforces the cap") {
  const Instance inst = make_instance({{0.9, 0.5}, {0.1, 0.5}}, OutcomeFamily::bernoulli(), {},
                                      {2.0, 0.5});
  TrialEnvironment env(inst, 0, RandomStream(1), 3);
  env.observe(0);
  env.observe(1);
  CHECK(env.cost() == 2.5);
  CHECK_FALSE(env.exhausted());
  env.observe(1);
  CHECK(env.exhausted());
  CHECK(env.steps() == 3);
}

TEST_CASE("trials") {
  SUBCASE("single hypothesis") {
    const Instance inst = make_instance({{0.4, 0.6}});
    const RandomPolicy policy(inst, 0.05);
    const auto rec = run_trial(inst, policy, 0.05, TrialKey{1, 0, 0, 0}, "one", "random");
    CHECK(rec.output_h == 0);
    CHECK(rec.cost == 0.0);
    CHECK(rec.correct);
  }
  SUBCASE("deterministic") {
    const Instance inst = generate_synthetic(5, 6, SyntheticMode::uniform01(), 2);
    const RandomPolicy policy(inst, 0.05);
    const TrialKey key{4, 1, 2, 3};
    CHECK(run_trial(inst, policy, 0.05, key, "i", "p") ==
          run_trial(inst, policy, 0.05, key, "i", "p"));
  }
  SUBCASE("common true hypothesis across policies") {
    const Instance inst = generate_synthetic(5, 6, SyntheticMode::uniform01(), 2);
    for (std::size_t r = 0; r < 20; ++r) {
      CHECK(draw_true_hypothesis(inst, TrialKey{4, 1, 0, r}) ==
            draw_true_hypothesis(inst, TrialKey{4, 1, 7, r}));
    }
  }
  SUBCASE("selection cap flags the record") {
    const Instance inst = make_instance({{0.5, 0.5001}, {0.5, 0.5}});
    const RandomPolicy policy(inst, 0.001);
    const auto rec = run_trial(inst, policy, 0.001, TrialKey{1, 0, 0, 0}, "i", "p", 50);
    CHECK(rec.capped);
    CHECK(rec.steps == 50);
  }
}

TEST_CASE("policies at delta 0.05 reach their accuracy on a separated instance") {
  const Instance inst = generate_synthetic(4, 6, SyntheticMode::grid(8), 12);
  for (const std::string kind : {"random", "rnb-exp", "fa-exp", "nj", "nj-pa"}) {
    PolicySpec spec;
    spec.kind = kind;
    const auto policy = make_policy(spec, inst, 0.05);
    std::vector<BatchJob> jobs{{&inst, "i", 0, policy.get(), kind, 0, 0.05}};
    const auto records = run_batch(jobs, 2000, 13, 1);
    const Metrics m = aggregate(records, inst.prior());
    INFO(kind);
    CHECK(m.accuracy >= 0.95 - 3 * std::sqrt(0.05 * 0.95 / 2000));
  }
}

TEST_CASE("batch output does not depend on the thread count") {
  const Instance inst = generate_synthetic(6, 8, SyntheticMode::uniform01(), 14);
  const RandomPolicy random(inst, 0.05);
  const FaExperimentPolicy fa(inst, FaExperimentParams{});
  std::vector<BatchJob> jobs{{&inst, "i", 0, &random, "random", 0, 0.05},
                             {&inst, "i", 0, &fa, "fa-exp", 1, 0.05}};
  const auto one = run_batch(jobs, 100, 15, 1);
  const auto four = run_batch(jobs, 100, 15, 4);
  CHECK(one == four);
  std::ostringstream a, b;
  write_trial_csv(a, one);
  write_trial_csv(b, four);
  CHECK(a.str() == b.str());
}

namespace {

TrialRecord rec(std::size_t truth, std::size_t out, double cost, std::string policy = "p",
                double delta = 0.1) {
  TrialRecord r;
  r.instance_id = "i";
  r.policy = std::move(policy);
  r.delta = delta;
  r.true_h = truth;
  r.output_h = out;
  r.cost = cost;
  r.correct = truth == out;
  return r;
}

}  // namespace

TEST_CASE("aggregate hand fixture") {
  const std::vector<TrialRecord> records{rec(0, 0, 1), rec(0, 1, 3), rec(1, 1, 2),
                                         rec(1, 1, 2), rec(2, 2, 4), rec(2, 0, 6)};
  const std::vector<double> prior{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const Metrics m = aggregate(records, prior);
  CHECK(m.trials == 6);
  CHECK(m.accuracy == doctest::Approx(4.0 / 6));
  CHECK(m.mean_cost == doctest::Approx(3.0));
  CHECK(m.confusion == std::vector<std::vector<std::size_t>>{{1, 1, 0}, {0, 2, 0}, {1, 0, 1}});
  CHECK(m.pac_error == std::vector<double>{0.5, 0.0, 0.5});
  CHECK(m.max_pac_error == 0.5);
  CHECK(m.total_error == doctest::Approx(1.0 / 3));
  CHECK(m.sensitivity[1] == 1.0);
  // Specificity of h0: of the 4 trials with another truth, 3 did not output h0.
  CHECK(m.specificity[0] == doctest::Approx(0.75));
  CHECK(m.total_error <= m.max_pac_error);
  CHECK(m.accuracy == doctest::Approx(1.0 - m.total_error));
  for (std::size_t h = 0; h < 3; ++h) {
    std::size_t row = 0;
    for (auto c : m.confusion[h]) row += c;
    CHECK(row == 2);
  }
}

TEST_CASE("aggregate edge cases") {
  const std::vector<double> prior{0.5, 0.5};
  SUBCASE("all correct") {
    const std::vector<TrialRecord> records{rec(0, 0, 1), rec(1, 1, 1)};
    const Metrics m = aggregate(records, prior);
    CHECK(m.accuracy == 1.0);
    CHECK(m.sensitivity == std::vector<double>{1.0, 1.0});
  }
  SUBCASE("symmetric errors give the same total error") {
    const std::vector<TrialRecord> records{rec(0, 0, 1), rec(0, 1, 1), rec(1, 1, 1),
                                           rec(1, 0, 1)};
    CHECK(aggregate(records, prior).total_error == doctest::Approx(0.5));
  }
  SUBCASE("mixed instances need the flag") {
    auto records = std::vector<TrialRecord>{rec(0, 0, 1), rec(1, 1, 1)};
    records[1].instance_id = "j";
    CHECK_THROWS_AS(aggregate(records, prior), ValidationError);
    AggregateOptions o;
    o.allow_mixed_instances = true;
    CHECK_NOTHROW(aggregate(records, prior, o));
  }
  SUBCASE("empty") {
    CHECK_THROWS_AS(aggregate(std::vector<TrialRecord>{}, prior), ValidationError);
  }
  SUBCASE("normalized cost") {
    const std::vector<TrialRecord> records{rec(0, 0, 2), rec(1, 1, 4)};
    AggregateOptions o;
    o.reference_cost = 6.0;
    CHECK(*aggregate(records, prior, o).normalized_cost == doctest::Approx(0.5));
  }
}

TEST_CASE("trial csv round trip") {
  std::vector<TrialRecord> records{rec(0, 1, 2.5), rec(1, 1, 1.0 / 3)};
  records[0].seed = 123456789012345ull;
  records[1].steps = 7;
  std::ostringstream out;
  write_trial_csv(out, records);
  const std::string text = out.str();
  CHECK(text.rfind("instance_id,policy,delta,rep,true_h,output_h,cost,steps,correct,seed\n", 0) ==
        0);
  std::istringstream in(text);
  CHECK(read_trial_csv(in) == records);
  std::istringstream bad("instance_id,policy\nx,y\n");
  CHECK_THROWS(read_trial_csv(bad));
}

TEST_CASE("accuracy-cost curve") {
  // Two deltas per policy; the reference's largest mean cost is 10.
  const std::vector<TrialRecord> records{
      rec(0, 0, 8, "random", 0.2), rec(0, 1, 8, "random", 0.2),
      rec(0, 0, 10, "random", 0.1), rec(1, 1, 10, "random", 0.1),
      rec(0, 0, 4, "fa", 0.2),      rec(1, 1, 6, "fa", 0.2)};
  const auto curve = accuracy_cost_curve(records, "random");
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].policy == "random");
  CHECK(curve[0].delta == 0.2);
  CHECK(curve[0].accuracy == 0.5);
  CHECK(curve[0].norm_cost == doctest::Approx(0.8));
  CHECK(curve[1].norm_cost == doctest::Approx(1.0));
  CHECK(curve[2].policy == "fa");
  CHECK(curve[2].mean_cost == 5.0);
  CHECK(curve[2].norm_cost == doctest::Approx(0.5));
  std::ostringstream out;
  write_curve_csv(out, curve);
  CHECK(out.str().rfind("policy,delta,accuracy,mean_cost,norm_cost\n", 0) == 0);
  CHECK_THROWS_AS(accuracy_cost_curve(records, "missing"), ValidationError);

  const std::vector<TrialRecord> single{rec(0, 0, 3, "random", 0.05)};
  CHECK(accuracy_cost_curve(single, "random").size() == 1);
}

TEST_CASE("cost at matched accuracy") {
  std::vector<CurvePoint> points{{"p", 0.2, 100, 0.9, 10.0, 1.0, 0.0},
                                 {"p", 0.1, 100, 1.0, 20.0, 2.0, 0.0},
                                 {"q", 0.2, 100, 0.97, 7.0, 0.5, 0.0}};
  const auto p = cost_at_accuracy(points, "p", 0.95);
  REQUIRE(p);
  CHECK(p->mean_cost == doctest::Approx(15.0));
  CHECK(p->se_cost == doctest::Approx(1.5));
  CHECK_FALSE(p->clamped);
  const auto q = cost_at_accuracy(points, "q", 0.95);
  REQUIRE(q);
  CHECK(q->clamped);
  CHECK(q->mean_cost == 7.0);
  CHECK_FALSE(cost_at_accuracy(points, "p", 1.01));
  CHECK_FALSE(cost_at_accuracy(points, "r", 0.95));
}
