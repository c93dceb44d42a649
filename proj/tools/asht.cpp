#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "asht/bench.hpp"
#include "asht/engine.hpp"
#include "asht/error.hpp"
#include "asht/experiment.hpp"
#include "asht/instance.hpp"
#include "asht/verify.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitVerification = 3;
constexpr int kExitNonTermination = 4;

asht::SyntheticMode parse_mode(const std::string& mode, int grid_k) {
  if (mode == "uniform01") return asht::SyntheticMode::uniform01();
  if (mode == "grid") return asht::SyntheticMode::grid(grid_k);
  throw asht::ValidationError("unknown mode '" + mode + "' (uniform01 or grid)");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw asht::ValidationError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw asht::ParseError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw asht::ValidationError("cannot write " + path);
  out << text;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("ASHTE_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw asht::ValidationError(std::string("ASHTE_SEED is not an integer: ") + v);
  }
}

struct GenArgs {
  std::size_t hyps = 25, acts = 40;
  std::string mode = "uniform01";
  int grid_k = 8;
  std::optional<std::uint64_t> seed;
  std::string mutations;
  double floor = asht::kMutationFloor;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  const asht::Instance inst =
      a.mutations.empty()
          ? asht::generate_synthetic(a.hyps, a.acts, parse_mode(a.mode, a.grid_k),
                                     a.seed.value_or(env_seed().value_or(1)))
          : asht::load_mutation_table(a.mutations, a.floor);
  write_text(a.out, asht::instance_to_json(inst).dump(2) + "\n");
  return 0;
}

struct RunArgs {
  std::string config;
  std::optional<std::size_t> hyps, acts, count, reps, threads, cap;
  std::optional<std::string> mode;
  std::optional<int> grid_k;
  std::optional<std::uint64_t> gen_seed, seed;
  std::vector<std::string> instances, policies;
  std::vector<double> deltas;
  std::optional<std::string> reference, trials, metrics, plot;
  std::string dump_config;
};

asht::PolicySpec parse_policy_flag(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    try {
      return asht::policy_spec_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw asht::ParseError("--policy: " + std::string(e.what()));
    }
  }
  return asht::policy_spec_from_json(text);
}

asht::ExperimentConfig build_config(const RunArgs& a) {
  asht::ExperimentConfig cfg;
  bool seed_in_config = false;
  if (!a.config.empty()) {
    const auto j = read_json(a.config);
    cfg = asht::config_from_json(j);
    seed_in_config = j.contains("master_seed");
  }
  const bool generate_flags = a.hyps || a.acts || a.mode || a.grid_k || a.count || a.gen_seed;
  if (!a.instances.empty()) {
    cfg.instance_files = a.instances;
    if (!generate_flags) cfg.generate.reset();
  }
  if (generate_flags) {
    auto g = cfg.generate.value_or(asht::GenerateSpec{});
    if (a.hyps) g.num_h = *a.hyps;
    if (a.acts) g.num_a = *a.acts;
    if (a.mode || a.grid_k) {
      g.mode = parse_mode(a.mode.value_or(g.mode.kind == asht::SyntheticMode::Kind::Grid
                                              ? "grid"
                                              : "uniform01"),
                          a.grid_k.value_or(g.mode.grid_k));
    }
    if (a.count) g.count = *a.count;
    if (a.gen_seed) g.seed = *a.gen_seed;
    cfg.generate = g;
    if (a.instances.empty()) cfg.instance_files.clear();
  }
  if (!a.policies.empty()) {
    cfg.policies.clear();
    for (const auto& p : a.policies) cfg.policies.push_back(parse_policy_flag(p));
  }
  if (!a.deltas.empty()) cfg.deltas = a.deltas;
  if (a.reps) cfg.replications = *a.reps;
  if (a.threads) cfg.threads = *a.threads;
  if (a.cap) cfg.selection_cap = *a.cap;
  if (a.seed) cfg.master_seed = *a.seed;
  else if (!seed_in_config) cfg.master_seed = env_seed().value_or(cfg.master_seed);
  if (a.reference) cfg.reference_policy = *a.reference;
  if (a.trials) cfg.trials_path = *a.trials;
  if (a.metrics) cfg.metrics_path = *a.metrics;
  if (a.plot) cfg.plot_path = *a.plot;
  cfg.validate();
  return cfg;
}

int cmd_run(const RunArgs& a) {
  const asht::ExperimentConfig cfg = build_config(a);
  if (!a.dump_config.empty()) {
    write_text(a.dump_config, asht::config_to_json(cfg).dump(2) + "\n");
  }
  const auto instances = asht::materialize_instances(cfg);
  const auto records = asht::run_experiment(cfg, instances);
  if (!cfg.trials_path.empty()) asht::write_trial_csv(cfg.trials_path, records);
  const auto metrics = asht::experiment_metrics_json(cfg, instances, records);
  write_text(cfg.metrics_path, metrics.dump(2) + "\n");
  if (!cfg.plot_path.empty()) {
    std::ostringstream ss;
    const auto curve = asht::accuracy_cost_curve(records, cfg.reference_policy);
    asht::write_curve_csv(ss, curve);
    write_text(cfg.plot_path, ss.str());
  }
  std::size_t capped = 0;
  for (const auto& r : records) capped += r.capped;
  if (capped > 0) {
    std::cerr << capped << " trial(s) hit the selection cap of " << cfg.selection_cap << "\n";
    return kExitNonTermination;
  }
  return 0;
}

struct VerifyArgs {
  std::optional<std::uint64_t> fuzz_seed;
  double perturbation = 0.0;
  std::string json;
};

int cmd_verify(const VerifyArgs& a) {
  asht::VerifyOptions o;
  o.fuzz_seed = a.fuzz_seed.value_or(env_seed().value_or(1));
  o.lp_perturbation = a.perturbation;
  const auto checks = asht::run_verification(o);
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.cases << " cases, "
              << c.failures << " failed): " << c.detail << "\n";
  }
  if (!a.json.empty()) write_text(a.json, asht::verification_to_json(o, checks).dump(2) + "\n");
  return ok ? 0 : kExitVerification;
}

struct ReportArgs {
  std::vector<std::string> trials;
  std::string reference = "random";
  std::string out;
  std::optional<double> target;
};

int cmd_report(const ReportArgs& a) {
  std::vector<asht::TrialRecord> records;
  for (const auto& path : a.trials) {
    auto part = asht::read_trial_csv(path);
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto curve = asht::accuracy_cost_curve(records, a.reference);
  std::ostringstream ss;
  asht::write_curve_csv(ss, curve);
  write_text(a.out, ss.str());
  if (a.target) {
    std::vector<std::string> seen;
    for (const auto& p : curve) {
      if (std::find(seen.begin(), seen.end(), p.policy) != seen.end()) continue;
      seen.push_back(p.policy);
      const auto m = asht::cost_at_accuracy(curve, p.policy, *a.target);
      std::cerr << p.policy << ": ";
      if (!m) std::cerr << "no data\n";
      else
        std::cerr << "cost " << asht::format_double(m->mean_cost) << " se "
                  << asht::format_double(m->se_cost) << (m->clamped ? " (clamped)" : "") << "\n";
    }
  }
  return 0;
}

struct BenchArgs {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::vector<int> only;
  std::string json;
};

int cmd_bench(const BenchArgs& a) {
  asht::BenchOptions o;
  o.seed = a.seed.value_or(env_seed().value_or(1));
  o.threads = a.threads;
  o.only.insert(a.only.begin(), a.only.end());
  const auto results = asht::run_acceptance(o);
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed;
    std::cout << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " [" << r.title
              << "]: " << r.summary << " (" << std::fixed << std::setprecision(1) << r.seconds
              << " s)\n";
  }
  if (!a.json.empty()) write_text(a.json, asht::acceptance_to_json(results).dump(2) + "\n");
  return ok ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active sequential hypothesis testing toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "write a synthetic or mutation-table instance as JSON");
  g->add_option("--hyps", gen.hyps, "number of hypotheses");
  g->add_option("--acts", gen.acts, "number of actions");
  g->add_option("--mode", gen.mode, "uniform01 or grid");
  g->add_option("--grid-k", gen.grid_k, "grid resolution");
  g->add_option("--seed", gen.seed, "generator seed (default ASHTE_SEED or 1)");
  g->add_option("--from-mutations", gen.mutations, "mutation-probability CSV");
  g->add_option("--floor", gen.floor, "replacement for zero mutation probabilities");
  g->add_option("-o,--out", gen.out, "output path (stdout if omitted)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "run an experiment");
  r->add_option("-c,--config", run.config, "JSON experiment config");
  r->add_option("--hyps", run.hyps);
  r->add_option("--acts", run.acts);
  r->add_option("--mode", run.mode);
  r->add_option("--grid-k", run.grid_k);
  r->add_option("--count", run.count, "number of generated instances");
  r->add_option("--gen-seed", run.gen_seed, "instance generator seed");
  r->add_option("--instance", run.instances, "instance file (repeatable)");
  r->add_option("--policy", run.policies, "policy kind or JSON object (repeatable)");
  r->add_option("--delta", run.deltas, "target error (repeatable)");
  r->add_option("--reps", run.reps, "replications per instance, policy and delta");
  r->add_option("--seed", run.seed, "master seed (default ASHTE_SEED or 1)");
  r->add_option("--threads", run.threads);
  r->add_option("--cap", run.cap, "selection cap per trial");
  r->add_option("--reference", run.reference, "policy used to normalize costs");
  r->add_option("--trials", run.trials, "trial CSV path");
  r->add_option("--metrics", run.metrics, "metrics JSON path (stdout if omitted)");
  r->add_option("--plot", run.plot, "curve CSV path");
  r->add_option("--dump-config", run.dump_config, "write the effective config as JSON");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "run the oracle and invariant checks");
  v->add_option("--fuzz-seed", ver.fuzz_seed);
  v->add_option("--inject-lp-perturbation", ver.perturbation,
                "offset added to closed-form LP values");
  v->add_option("--json", ver.json, "JSON report path");

  ReportArgs rep;
  auto* p = app.add_subcommand("report", "build accuracy-cost curves from trial CSVs");
  p->add_option("--trials", rep.trials, "trial CSV (repeatable)")->required();
  p->add_option("--reference", rep.reference);
  p->add_option("-o,--out", rep.out, "curve CSV path (stdout if omitted)");
  p->add_option("--target", rep.target, "also print each policy's cost at this accuracy");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "run the canned acceptance experiments");
  b->add_option("--seed", bench.seed);
  b->add_option("--threads", bench.threads);
  b->add_option("--only", bench.only, "criterion id (repeatable)");
  b->add_option("--json", bench.json, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*r) return cmd_run(run);
    if (*v) return cmd_verify(ver);
    if (*p) return cmd_report(rep);
    if (*b) return cmd_bench(bench);
  } catch (const asht::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
