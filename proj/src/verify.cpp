#include "asht/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "asht/baselines.hpp"
#include "asht/engine.hpp"
#include "asht/fa.hpp"
#include "asht/fuzz.hpp"
#include "asht/oracles.hpp"
#include "asht/ranking.hpp"
#include "asht/rnb.hpp"

namespace asht {

namespace {

class Check {
 public:
  explicit Check(std::string name) { result_.name = std::move(name); }

  void expect(bool ok, const std::function<std::string()>& describe) {
    ++result_.cases;
    if (ok) return;
    ++result_.failures;
    if (result_.passed) result_.detail = describe();
    result_.passed = false;
  }

  CheckResult finish(const std::string& summary) {
    if (result_.passed) result_.detail = summary;
    return result_;
  }

 private:
  CheckResult result_;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

RandomStream stream(const VerifyOptions& o, std::uint64_t tag) {
  return RandomStream(derive_seed({o.fuzz_seed, tag}));
}

CheckResult check_kl(const VerifyOptions&) {
  Check c("kl_divergence");
  const auto bern = OutcomeFamily::bernoulli();
  const auto gauss = OutcomeFamily::unit_gaussian();
  for (int i = 0; i <= 20; ++i) {
    const double x = i / 20.0;
    c.expect(kl_divergence(bern, x, x).value() == 0.0, [&] { return "KL(x,x) != 0 at " + fmt(x); });
    c.expect(kl_divergence(gauss, x, x).value() == 0.0, [&] { return "Gaussian KL(x,x) != 0"; });
    for (int j = 1; j < 20; ++j) {
      const double y = j / 20.0;
      const double v = kl_divergence(bern, x, y).value();
      c.expect(v >= 0.0 && (v > 0.0) == (i != j),
               [&] { return "KL sign wrong at " + fmt(x) + "," + fmt(y); });
    }
  }
  c.expect(std::abs(kl_divergence(bern, 0.75, 0.25).value() - 0.5 * std::log(3.0)) < 1e-12,
           [] { return "KL(0.75,0.25) != ln(3)/2"; });
  c.expect(kl_divergence(gauss, 1.0, 0.0).value() == 0.5, [] { return "Gaussian KL(1,0) != 0.5"; });
  c.expect(kl_divergence(bern, 0.5, 0.0).unbounded, [] { return "boundary KL not unbounded"; });
  return c.finish("closed forms and sign on a 21-point grid");
}

CheckResult check_lp_equal(const VerifyOptions& o) {
  Check c("lp_closed_form_vs_simplex");
  auto rng = stream(o, 2);
  for (int i = 0; i < 200; ++i) {
    const LpInstance lp = random_lp_instance(rng, 12, 2.0);
    const double closed = lp_closed_form(lp) + o.lp_perturbation;
    const double simplex = lp_simplex(lp);
    c.expect(std::abs(closed - simplex) <= 1e-9, [&] {
      return "case " + std::to_string(i) + ": closed form " + fmt(closed) + " vs simplex " +
             fmt(simplex);
    });
  }
  return c.finish("200 fuzzed LP(d,t) agree within 1e-9");
}

CheckResult check_lp_bound(const VerifyOptions& o) {
  Check c("lp_lower_bound");
  auto rng = stream(o, 3);
  for (int i = 0; i < 500; ++i) {
    const LpInstance lp = random_lp_instance(rng, 12, 1.0);
    c.expect(lp_lower_bound_check(lp), [&] { return "bound fails on case " + std::to_string(i); });
  }
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t t = 0; t <= n; ++t) {
      const LpInstance lp{std::vector<double>(n, 0.5), t};
      const double want = t == 0 ? 1.0 : static_cast<double>(t);
      c.expect(lp_closed_form(lp) == want, [&] {
        return "uniform d, N=" + std::to_string(n) + " t=" + std::to_string(t) + " gives " +
               fmt(lp_closed_form(lp));
      });
    }
  }
  return c.finish("500 fuzzed bounds hold; uniform d returns t");
}

CheckResult check_sfr(const VerifyOptions& o) {
  Check c("sfr_greedy_vs_bruteforce");
  auto rng = stream(o, 4);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const SfrCase k = random_sfr_case(rng, 6);
    const double greedy =
        gre_rank(k.instance, k.saturation, k.multiplicity).weighted_cover_time(k.instance);
    const double opt =
        brute_force_sfr(k.instance, k.saturation, k.multiplicity).weighted_cover_time;
    const double eps = min_marginal_epsilon(k.instance, k.saturation, k.multiplicity);
    const double guard = 4.0 * (1.0 + std::log(1.0 / eps));
    worst = std::max(worst, greedy / opt);
    c.expect(greedy >= opt - 1e-12 && greedy <= guard * opt, [&] {
      return "case " + std::to_string(i) + ": greedy " + fmt(greedy) + " opt " + fmt(opt) +
             " guard " + fmt(guard);
    });
  }
  return c.finish("100 cases, worst greedy/opt " + fmt(worst));
}

CheckResult check_submodular(const VerifyOptions& o) {
  Check c("cover_submodularity");
  auto rng = stream(o, 5);
  for (int i = 0; i < 300; ++i) {
    const SfrCase k = random_sfr_case(rng, 6);
    const std::size_t num_a = k.instance.num_actions();
    const CoverFunction f(k.instance, rng.uniform_index(k.instance.num_hypotheses()),
                          k.saturation);
    std::vector<std::size_t> s(num_a), t(num_a);
    for (std::size_t a = 0; a < num_a; ++a) {
      s[a] = rng.uniform_index(3);
      t[a] = s[a] + rng.uniform_index(3);
    }
    const std::size_t u = rng.uniform_index(num_a);
    auto su = s, tu = t;
    ++su[u];
    ++tu[u];
    const double fs = f.eval(s), ft = f.eval(t), fsu = f.eval(su), ftu = f.eval(tu);
    c.expect(fs <= ft + 1e-12 && fsu - fs >= ftu - ft - 1e-12 && fs >= 0.0 && ft <= 1.0,
             [&] { return "monotone/submodular violation in case " + std::to_string(i); });
  }
  return c.finish("300 random (S <= T, u) triples");
}

CheckResult check_odt(const VerifyOptions& o) {
  Check c("odt_greedy_vs_dp");
  auto rng = stream(o, 6);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Instance inst = random_deterministic_instance(rng, 10);
    const double greedy = greedy_tree_cost(inst);
    const double opt = brute_force_odt(inst);
    worst = std::max(worst, greedy / opt);
    c.expect(greedy >= opt - 1e-12 && greedy <= 4.0 * opt, [&] {
      return "case " + std::to_string(i) + ": greedy " + fmt(greedy) + " opt " + fmt(opt);
    });
  }
  const double ovr = brute_force_odt(one_vs_rest_instance(4));
  c.expect(std::abs(ovr - 2.25) <= 1e-12, [&] { return "one-vs-rest n=4 gives " + fmt(ovr); });
  return c.finish("50 cases, worst greedy/opt " + fmt(worst) + "; one-vs-rest 2.25");
}

CheckResult check_odt_monotone(const VerifyOptions& o) {
  Check c("odt_dp_subset_monotone");
  auto rng = stream(o, 7);
  for (int i = 0; i < 50; ++i) {
    const Instance inst = random_deterministic_instance(rng, 8);
    const std::size_t n = inst.num_hypotheses();
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    const std::uint64_t s = full & rng();
    const std::uint64_t sub = s & rng();
    auto weighted = [&](std::uint64_t m) {
      double mass = 0.0;
      for (std::size_t h = 0; h < n; ++h) {
        if (m >> h & 1u) mass += inst.prior(h);
      }
      return mass * brute_force_odt_subset(inst, m);
    };
    const double ws = weighted(s), wsub = weighted(sub);
    c.expect(wsub <= ws + 1e-12, [&] {
      return "case " + std::to_string(i) + ": subset cost " + fmt(wsub) + " > " + fmt(ws);
    });
  }
  return c.finish("prior-weighted optimum of a subset never exceeds the superset's");
}

CheckResult check_max_min(const VerifyOptions& o) {
  Check c("max_min_lp");
  auto rng = stream(o, 8);
  for (int i = 0; i < 100; ++i) {
    const Instance inst = generate_synthetic(6 + rng.uniform_index(7), 3 + rng.uniform_index(8),
                                             SyntheticMode::uniform01(), rng());
    AliveSet alive(inst.num_hypotheses());
    while (alive.size() < 2) {
      for (std::size_t h = 0; h < inst.num_hypotheses(); ++h) {
        if (rng.uniform() < 0.5) alive.insert(h);
      }
    }
    const ActionDistribution d = nj_phase1_distribution(inst, alive);
    std::vector<std::vector<double>> rows;
    for (auto h : alive.members()) {
      for (auto g : alive.members()) {
        if (h == g) continue;
        std::vector<double> r(inst.num_actions());
        for (std::size_t a = 0; a < r.size(); ++a) r[a] = std::min(inst.divergence(h, g, a), 50.0);
        rows.push_back(r);
      }
    }
    const double oracle = max_min_by_simplex(rows);
    double total = 0.0;
    for (double w : d.weights) total += w;
    c.expect(std::abs(d.value - oracle) <= 1e-9 && std::abs(total - 1.0) <= 1e-12, [&] {
      return "alive set " + std::to_string(i) + ": " + fmt(d.value) + " vs " + fmt(oracle);
    });
  }
  for (int i = 0; i < 100; ++i) {
    const auto m = random_matrix(rng, 1 + rng.uniform_index(6), 1 + rng.uniform_index(4));
    bool zero_row = false;
    for (const auto& r : m) zero_row |= std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
    if (zero_row) continue;
    const double v = max_min_distribution(m).value;
    const double oracle = max_min_by_vertices(m);
    c.expect(std::abs(v - oracle) <= 1e-9, [&] {
      return "matrix " + std::to_string(i) + ": " + fmt(v) + " vs vertices " + fmt(oracle);
    });
  }
  return c.finish("packing-dual LP matches the direct LP and vertex enumeration");
}

CheckResult check_posterior(const VerifyOptions& o) {
  Check c("posterior_normalization");
  auto rng = stream(o, 9);
  for (int i = 0; i < 20; ++i) {
    const bool gauss = i % 2 == 1;
    Instance base = generate_synthetic(2 + rng.uniform_index(8), 3, SyntheticMode::uniform01(), rng());
    InstanceData data = base.data();
    data.prior = random_prior(rng, data.prior.size());
    if (gauss) data.family = OutcomeFamily::unit_gaussian();
    const Instance inst = Instance::create(std::move(data));
    PosteriorState post(inst.prior());
    std::vector<double> loglik(inst.num_hypotheses(), 0.0);
    const std::size_t truth = rng.uniform_index(inst.num_hypotheses());
    for (int step = 0; step < 200; ++step) {
      const std::size_t a = rng.uniform_index(inst.num_actions());
      const double y = sample_outcome(inst.family(), inst.mean(truth, a), rng);
      post.update(inst, a, y);
      double top = -1e300;
      for (std::size_t h = 0; h < loglik.size(); ++h) {
        loglik[h] += log_likelihood(inst.family(), inst.mean(h, a), y);
        top = std::max(top, std::log(inst.prior(h)) + loglik[h]);
      }
      double total = 0.0, z = 0.0;
      for (std::size_t h = 0; h < loglik.size(); ++h) {
        total += post.probability(h);
        z += std::exp(std::log(inst.prior(h)) + loglik[h] - top);
      }
      double gap = 0.0;
      for (std::size_t h = 0; h < loglik.size(); ++h) {
        gap = std::max(gap, std::abs(post.probability(h) -
                                     std::exp(std::log(inst.prior(h)) + loglik[h] - top) / z));
      }
      c.expect(std::abs(total - 1.0) <= 1e-12 && gap <= 1e-9, [&] {
        return "instance " + std::to_string(i) + " step " + std::to_string(step) + ": sum " +
               fmt(total) + " gap " + fmt(gap);
      });
    }
  }
  return c.finish("20 instances x 200 updates");
}

CheckResult check_enumeration(const VerifyOptions& o) {
  Check c("exact_enumeration_mass");
  auto rng = stream(o, 10);
  for (int i = 0; i < 20; ++i) {
    const PlanCase k = random_plan_case(rng, 16);
    const ExactPlanCost e = exact_policy_cost(k.instance, build_plan(k.instance, k.params));
    for (std::size_t h = 0; h < e.mass.size(); ++h) {
      c.expect(std::abs(e.mass[h] - 1.0) <= 1e-12,
               [&] { return "plan " + std::to_string(i) + " mass " + fmt(e.mass[h]); });
    }
  }
  return c.finish("leaf probabilities sum to 1 for every hypothesis");
}

CheckResult check_fa_tables(const VerifyOptions& o) {
  Check c("fa_step_tables");
  auto rng = stream(o, 11);
  for (int i = 0; i < 20; ++i) {
    const Instance inst = generate_synthetic(3 + rng.uniform_index(10), 2 + rng.uniform_index(10),
                                             SyntheticMode::grid(8), rng());
    const FaExperimentParams params{1 + rng.uniform_index(5), 0.5, 0.05};
    const FaExperimentPolicy policy(inst, params);
    for (int j = 0; j < 20; ++j) {
      const auto post = random_prior(rng, inst.num_hypotheses());
      const MetaTest a = fa_experiment_step(inst, post, params);
      const MetaTest b = policy.step(post);
      c.expect(a.action == b.action && a.repetitions == b.repetitions,
               [&] { return "table and direct scores disagree on instance " + std::to_string(i); });
    }
  }
  return c.finish("precomputed elimination sets reproduce the direct step");
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  return {check_kl(options),        check_lp_equal(options),    check_lp_bound(options),
          check_sfr(options),       check_submodular(options),  check_odt(options),
          check_odt_monotone(options), check_max_min(options),  check_posterior(options),
          check_enumeration(options), check_fa_tables(options)};
}

nlohmann::json verification_to_json(const VerifyOptions& options,
                                    const std::vector<CheckResult>& checks) {
  nlohmann::json j;
  j["fuzz_seed"] = options.fuzz_seed;
  j["lp_perturbation"] = options.lp_perturbation;
  bool all = true;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    all = all && c.passed;
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"cases", c.cases},
                           {"failures", c.failures},
                           {"detail", c.detail}});
  }
  j["passed"] = all;
  return j;
}

}  // namespace asht
