#include "asht/bench.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "asht/engine.hpp"
#include "asht/experiment.hpp"
#include "asht/fuzz.hpp"
#include "asht/oracles.hpp"
#include "asht/policies.hpp"
#include "asht/rnb.hpp"
#include "asht/verify.hpp"

namespace asht {

namespace {

const std::vector<double> kDeltaGrid{0.2, 0.15, 0.1, 0.07, 0.05, 0.03, 0.02};
constexpr std::size_t kSuiteReps = 300;
constexpr std::size_t kErrorReps = 2000;

std::string fixed(double v, int digits = 4) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

PolicySpec spec_of(const std::string& kind, const std::string& label = "") {
  PolicySpec s;
  s.kind = kind;
  s.label = label;
  return s;
}

double pooled_se(const MatchedCost& a, const MatchedCost& b) {
  return std::sqrt(a.se_cost * a.se_cost + b.se_cost * b.se_cost);
}

nlohmann::json matched_json(const std::optional<MatchedCost>& m) {
  if (!m) return nullptr;
  return {{"mean_cost", m->mean_cost}, {"se_cost", m->se_cost}, {"clamped", m->clamped}};
}

CriterionResult titled(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

struct SuiteRun {
  ExperimentConfig cfg;
  std::vector<TrialRecord> records;
  std::vector<CurvePoint> curve;
  double seconds = 0.0;

  std::optional<MatchedCost> matched(const std::string& policy) const {
    return cost_at_accuracy(curve, policy, kMatchedAccuracy);
  }
};

SuiteRun run_suite(ExperimentConfig cfg) {
  const auto start = std::chrono::steady_clock::now();
  SuiteRun run;
  const auto instances = materialize_instances(cfg);
  run.records = run_experiment(cfg, instances);
  run.curve = accuracy_cost_curve(run.records, cfg.reference_policy);
  run.cfg = std::move(cfg);
  run.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

ExperimentConfig suite_config(const BenchOptions& o, std::size_t num_h, std::size_t num_a,
                              std::vector<PolicySpec> policies) {
  ExperimentConfig cfg;
  cfg.generate = GenerateSpec{num_h, num_a, SyntheticMode::uniform01(), 10, o.seed};
  cfg.policies = std::move(policies);
  cfg.deltas = kDeltaGrid;
  cfg.replications = kSuiteReps;
  cfg.master_seed = o.seed;
  cfg.threads = o.threads;
  return cfg;
}

std::vector<PolicySpec> ordering_policies() {
  return {spec_of("fa-exp"), spec_of("rnb-exp"), spec_of("random")};
}

class Bench {
 public:
  explicit Bench(BenchOptions o) : o_(std::move(o)) {}

  const SuiteRun& large() {
    if (!large_) {
      auto policies = ordering_policies();
      policies.push_back(spec_of("nj-pa"));
      PolicySpec alive = spec_of("nj-pa", "nj-pa-alive");
      alive.alive_pairs = true;
      policies.push_back(alive);
      policies.push_back(spec_of("nj"));
      large_ = run_suite(suite_config(o_, 25, 40, policies));
    }
    return *large_;
  }

  const std::vector<CheckResult>& checks() {
    if (!checks_) checks_ = run_verification(VerifyOptions{o_.seed, 0.0});
    return *checks_;
  }

  const CheckResult& check(const std::string& name) {
    for (const auto& c : checks()) {
      if (c.name == name) return c;
    }
    throw std::logic_error("unknown check " + name);
  }

  CriterionResult error_bound(int id, const std::string& kind, double delta) {
    CriterionResult r;
    r.id = id;
    const double threshold = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / kErrorReps);
    std::vector<Instance> instances;
    for (std::uint64_t i = 0; i < 5; ++i) {
      instances.push_back(generate_synthetic(6, 10, SyntheticMode::grid(8),
                                             derive_seed({o_.seed, 1, i})));
    }
    std::vector<std::unique_ptr<Policy>> policies;
    std::vector<BatchJob> jobs;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      policies.push_back(make_policy(spec_of(kind), instances[i], delta));
      jobs.push_back({&instances[i], "grid" + std::to_string(i), i, policies.back().get(), kind,
                      0, delta});
    }
    const auto records =
        run_batch(jobs, kErrorReps, derive_seed({o_.seed, static_cast<std::uint64_t>(id)}),
                  o_.threads);
    r.passed = true;
    double pooled = 0.0;
    std::string per;
    r.details["threshold"] = threshold;
    r.details["instances"] = nlohmann::json::array();
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const std::span<const TrialRecord> slice(records.data() + i * kErrorReps, kErrorReps);
      const Metrics m = aggregate(slice, instances[i].prior());
      const double err = 1.0 - m.accuracy;
      pooled += err / instances.size();
      r.passed = r.passed && err <= threshold;
      per += (i ? " " : "") + fixed(err);
      r.details["instances"].push_back(
          {{"error", err}, {"mean_cost", m.mean_cost}, {"max_pac_error", m.max_pac_error}});
    }
    r.details["pooled_error"] = pooled;
    r.summary = "errors [" + per + "] vs threshold " + fixed(threshold) + ", pooled " +
                fixed(pooled);
    return r;
  }

  CriterionResult c1() {
    auto r = error_bound(1, "rnb", 0.1);
    r.title = "partially adaptive error at delta 0.1";
    return r;
  }

  CriterionResult c2() {
    auto r = error_bound(2, "fa", 0.05);
    r.title = "fully adaptive error at delta 0.05";
    return r;
  }

  CriterionResult c3() {
    auto r = titled(3, "cost ordering fa-exp < rnb-exp < random at accuracy 0.95");
    const auto& s = large();
    const auto fa = s.matched("fa-exp"), rnb = s.matched("rnb-exp"), rnd = s.matched("random");
    r.details = {{"fa-exp", matched_json(fa)},
                 {"rnb-exp", matched_json(rnb)},
                 {"random", matched_json(rnd)},
                 {"suite_seconds", s.seconds}};
    if (!fa || !rnb || !rnd) {
      r.summary = "a policy never reached accuracy 0.95";
      return r;
    }
    const double gap1 = (rnb->mean_cost - fa->mean_cost) / pooled_se(*fa, *rnb);
    const double gap2 = (rnd->mean_cost - rnb->mean_cost) / pooled_se(*rnb, *rnd);
    r.passed = gap1 > 2.0 && gap2 > 2.0;
    r.summary = "fa-exp " + fixed(fa->mean_cost, 2) + ", rnb-exp " + fixed(rnb->mean_cost, 2) +
                ", random " + fixed(rnd->mean_cost, 2) + "; gaps " + fixed(gap1, 1) + " and " +
                fixed(gap2, 1) + " pooled SE (need > 2)";
    return r;
  }

  CriterionResult c4() {
    auto r = titled(4, "rnb-exp cheaper than nj-pa at accuracy 0.95");
    const auto& s = large();
    const auto rnb = s.matched("rnb-exp"), nj = s.matched("nj-pa"),
               alive = s.matched("nj-pa-alive");
    r.details = {{"rnb-exp", matched_json(rnb)},
                 {"nj-pa", matched_json(nj)},
                 {"nj-pa-alive", matched_json(alive)}};
    if (!rnb || !nj) {
      r.summary = "a policy never reached accuracy 0.95";
      return r;
    }
    const double gap = (nj->mean_cost - rnb->mean_cost) / pooled_se(*rnb, *nj);
    r.passed = gap > 1.0;
    r.summary = "rnb-exp " + fixed(rnb->mean_cost, 2) + ", nj-pa " + fixed(nj->mean_cost, 2) +
                "; gap " + fixed(gap, 1) + " pooled SE (need > 1)";
    if (alive) {
      r.summary += "; alive-pair nj-pa variant " + fixed(alive->mean_cost, 2) + " (info)";
    }
    return r;
  }

  CriterionResult c5() {
    auto r = titled(5, "LP closed form, lower bound, uniform case");
    const auto& eq = check("lp_closed_form_vs_simplex");
    const auto& lb = check("lp_lower_bound");
    r.passed = eq.passed && lb.passed;
    r.summary = eq.detail + "; " + lb.detail;
    r.details = {{"equality_failures", eq.failures}, {"bound_failures", lb.failures}};
    return r;
  }

  CriterionResult c6() {
    auto r = titled(6, "SFR greedy vs brute force");
    const auto& c = check("sfr_greedy_vs_bruteforce");
    r.passed = c.passed;
    r.summary = c.detail;
    r.details = {{"cases", c.cases}, {"failures", c.failures}};
    return r;
  }

  CriterionResult c7() {
    auto r = titled(7, "ODT greedy vs DP");
    const auto& c = check("odt_greedy_vs_dp");
    r.passed = c.passed;
    r.summary = c.detail;
    r.details = {{"cases", c.cases}, {"failures", c.failures}};
    return r;
  }

  CriterionResult c8() {
    auto r = titled(8, "Monte Carlo vs exact enumeration");
    constexpr std::size_t reps = 4000;
    auto rng = RandomStream(derive_seed({o_.seed, 8}));
    std::size_t comparisons = 0, failures = 0;
    double worst = 0.0;
    r.details["plans"] = nlohmann::json::array();
    for (std::uint64_t i = 0; i < 20; ++i) {
      const PlanCase k = random_plan_case(rng, 22);
      const RnBPlan plan = build_plan(k.instance, k.params);
      const ExactPlanCost exact = exact_policy_cost(k.instance, plan);
      const RnbPolicy policy(k.instance, plan, StopRule::Timestamps, k.params.delta, "rnb");
      const auto records =
          run_batch({{&k.instance, "plan" + std::to_string(i), i, &policy, "rnb", 0,
                      k.params.delta}},
                    reps, derive_seed({o_.seed, 8, i}), o_.threads);
      const std::size_t n_h = k.instance.num_hypotheses();
      std::vector<double> n(n_h), cost(n_h), wrong(n_h);
      for (const auto& rec : records) {
        n[rec.true_h] += 1.0;
        cost[rec.true_h] += rec.cost;
        wrong[rec.true_h] += rec.correct ? 0.0 : 1.0;
      }
      nlohmann::json per = nlohmann::json::array();
      for (std::size_t h = 0; h < n_h; ++h) {
        if (n[h] == 0.0) continue;
        const double mc_cost = cost[h] / n[h], mc_err = wrong[h] / n[h];
        const double sd_cost = std::sqrt(exact.cost_variance[h] / n[h]);
        const double p = exact.error[h];
        const double sd_err = std::sqrt(p * (1.0 - p) / n[h]);
        const double z_cost = sd_cost > 0 ? std::abs(mc_cost - exact.expected_cost[h]) / sd_cost
                              : std::abs(mc_cost - exact.expected_cost[h]) < 1e-9 ? 0.0
                                                                                  : INFINITY;
        const double z_err = sd_err > 0 ? std::abs(mc_err - p) / sd_err
                             : std::abs(mc_err - p) < 1e-12 ? 0.0
                                                            : INFINITY;
        comparisons += 2;
        failures += (z_cost > 3.0) + (z_err > 3.0);
        worst = std::max({worst, z_cost, z_err});
        per.push_back({{"h", h},
                       {"trials", n[h]},
                       {"exact_cost", exact.expected_cost[h]},
                       {"mc_cost", mc_cost},
                       {"exact_error", p},
                       {"mc_error", mc_err}});
      }
      r.details["plans"].push_back(per);
    }
    r.passed = failures == 0;
    r.summary = std::to_string(comparisons) + " comparisons over 20 plans, " +
                std::to_string(failures) + " beyond 3 sigma, worst |z| " + fixed(worst, 2);
    return r;
  }

  CriterionResult c9() {
    auto r = titled(9, "thread-count determinism of trial CSV");
    auto csv = [&](std::size_t threads) {
      auto cfg = suite_config(o_, 25, 40, ordering_policies());
      cfg.threads = threads;
      const auto records = run_experiment(cfg, materialize_instances(cfg));
      std::ostringstream ss;
      write_trial_csv(ss, records);
      return ss.str();
    };
    const std::string one = csv(1), eight = csv(8);
    r.passed = one == eight && !one.empty();
    r.summary = std::to_string(one.size()) + " vs " + std::to_string(eight.size()) + " bytes, " +
                (r.passed ? "identical" : "different");
    r.details = {{"bytes", one.size()}};
    return r;
  }

  CriterionResult c10() {
    auto r = titled(10, "fa-exp gain over nj larger with 5 hypotheses and 3 actions");
    const auto& big = large();
    const SuiteRun small = run_suite(
        suite_config(o_, 5, 3, {spec_of("fa-exp"), spec_of("nj"), spec_of("random")}));
    auto gain = [](const SuiteRun& s) -> std::optional<double> {
      const auto fa = s.matched("fa-exp"), nj = s.matched("nj");
      if (!fa || !nj) return std::nullopt;
      return (nj->mean_cost - fa->mean_cost) / nj->mean_cost;
    };
    const auto g_small = gain(small), g_big = gain(big);
    r.details = {{"small_fa-exp", matched_json(small.matched("fa-exp"))},
                 {"small_nj", matched_json(small.matched("nj"))},
                 {"large_fa-exp", matched_json(big.matched("fa-exp"))},
                 {"large_nj", matched_json(big.matched("nj"))}};
    if (!g_small || !g_big) {
      r.summary = "a policy never reached accuracy 0.95";
      return r;
    }
    r.passed = *g_small > *g_big;
    r.summary = "improvement (nj - fa)/nj: 5x3 " + fixed(100 * *g_small, 1) + "%, 25x40 " +
                fixed(100 * *g_big, 1) + "%";
    return r;
  }

  CriterionResult run(int id) {
    switch (id) {
      case 1: return c1();
      case 2: return c2();
      case 3: return c3();
      case 4: return c4();
      case 5: return c5();
      case 6: return c6();
      case 7: return c7();
      case 8: return c8();
      case 9: return c9();
      default: return c10();
    }
  }

 private:
  BenchOptions o_;
  std::optional<SuiteRun> large_;
  std::optional<std::vector<CheckResult>> checks_;
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const BenchOptions& options) {
  Bench bench(options);
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 10; ++id) {
    if (!options.only.empty() && !options.only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r = bench.run(id);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json acceptance_to_json(const std::vector<CriterionResult>& results) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results) {
    j.push_back({{"id", r.id},
                 {"title", r.title},
                 {"passed", r.passed},
                 {"summary", r.summary},
                 {"details", r.details},
                 {"seconds", r.seconds}});
  }
  return j;
}

}  // namespace asht
