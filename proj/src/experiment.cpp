#include "asht/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>

#include "asht/error.hpp"

namespace asht {

void ExperimentConfig::validate() const {
  if (generate.has_value() == !instance_files.empty()) {
    throw ValidationError("config needs exactly one instance source: generate or files");
  }
  if (generate) {
    if (generate->num_h < 2 || generate->num_a < 1 || generate->count < 1) {
      throw ValidationError("generate needs hyps >= 2, acts >= 1 and count >= 1");
    }
  }
  if (policies.empty()) throw ValidationError("config lists no policies");
  for (const auto& p : policies) validate_policy_spec(p);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (policies[i].id() == policies[j].id()) {
        throw ValidationError("duplicate policy id '" + policies[i].id() + "'");
      }
    }
  }
  if (deltas.empty()) throw ValidationError("config lists no delta values");
  for (double d : deltas) {
    if (!(d > 0.0 && d < 0.5)) throw ValidationError("every delta must lie in (0, 1/2)");
  }
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (threads < 1) throw ValidationError("threads must be at least 1");
  if (selection_cap < 1) throw ValidationError("selection_cap must be at least 1");
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  if (cfg.generate) {
    const auto& g = *cfg.generate;
    nlohmann::json gj;
    gj["hyps"] = g.num_h;
    gj["acts"] = g.num_a;
    gj["mode"] = g.mode.kind == SyntheticMode::Kind::Grid ? "grid" : "uniform01";
    gj["grid_k"] = g.mode.grid_k;
    gj["count"] = g.count;
    gj["seed"] = g.seed;
    j["instances"]["generate"] = gj;
  } else {
    j["instances"]["files"] = cfg.instance_files;
  }
  j["policies"] = nlohmann::json::array();
  for (const auto& p : cfg.policies) j["policies"].push_back(policy_spec_to_json(p));
  j["deltas"] = cfg.deltas;
  j["replications"] = cfg.replications;
  j["master_seed"] = cfg.master_seed;
  j["threads"] = cfg.threads;
  j["selection_cap"] = cfg.selection_cap;
  j["reference_policy"] = cfg.reference_policy;
  j["output"]["trials"] = cfg.trials_path;
  j["output"]["metrics"] = cfg.metrics_path;
  j["output"]["plot"] = cfg.plot_path;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    if (j.contains("instances")) {
      const auto& src = j.at("instances");
      if (src.contains("generate")) {
        const auto& g = src.at("generate");
        GenerateSpec spec;
        spec.num_h = g.value("hyps", spec.num_h);
        spec.num_a = g.value("acts", spec.num_a);
        const std::string mode = g.value("mode", std::string("uniform01"));
        if (mode == "grid") spec.mode = SyntheticMode::grid(g.value("grid_k", 8));
        else if (mode == "uniform01") spec.mode = SyntheticMode::uniform01();
        else throw ValidationError("unknown generate mode '" + mode + "'");
        spec.mode.grid_k = g.value("grid_k", spec.mode.grid_k);
        spec.count = g.value("count", spec.count);
        spec.seed = g.value("seed", spec.seed);
        cfg.generate = spec;
      }
      if (src.contains("files")) cfg.instance_files = src.at("files").get<std::vector<std::string>>();
    }
    if (j.contains("policies")) {
      for (const auto& p : j.at("policies")) cfg.policies.push_back(policy_spec_from_json(p));
    }
    if (j.contains("deltas")) cfg.deltas = j.at("deltas").get<std::vector<double>>();
    cfg.replications = j.value("replications", cfg.replications);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.selection_cap = j.value("selection_cap", cfg.selection_cap);
    cfg.reference_policy = j.value("reference_policy", cfg.reference_policy);
    if (j.contains("output")) {
      const auto& o = j.at("output");
      cfg.trials_path = o.value("trials", cfg.trials_path);
      cfg.metrics_path = o.value("metrics", cfg.metrics_path);
      cfg.plot_path = o.value("plot", cfg.plot_path);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  return cfg;
}

std::vector<NamedInstance> materialize_instances(const ExperimentConfig& cfg) {
  std::vector<NamedInstance> out;
  if (cfg.generate) {
    const auto& g = *cfg.generate;
    for (std::size_t i = 0; i < g.count; ++i) {
      out.push_back({"syn" + std::to_string(i),
                     generate_synthetic(g.num_h, g.num_a, g.mode, derive_seed({g.seed, i}))});
    }
  }
  for (const auto& f : cfg.instance_files) {
    out.push_back({std::filesystem::path(f).stem().string(), load_instance(f)});
  }
  return out;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg,
                                        const std::vector<NamedInstance>& instances) {
  cfg.validate();
  std::vector<std::unique_ptr<Policy>> owned;
  std::vector<BatchJob> jobs;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
      for (double delta : cfg.deltas) {
        owned.push_back(make_policy(cfg.policies[p], instances[i].instance, delta));
        BatchJob job;
        job.instance = &instances[i].instance;
        job.instance_id = instances[i].id;
        job.instance_index = i;
        job.policy = owned.back().get();
        job.policy_id = cfg.policies[p].id();
        job.policy_index = p;
        job.delta = delta;
        jobs.push_back(std::move(job));
      }
    }
  }
  return run_batch(jobs, cfg.replications, cfg.master_seed, cfg.threads, cfg.selection_cap);
}

nlohmann::json experiment_metrics_json(const ExperimentConfig& cfg,
                                       const std::vector<NamedInstance>& instances,
                                       const std::vector<TrialRecord>& records) {
  nlohmann::json out;
  out["groups"] = nlohmann::json::array();
  std::size_t capped = 0;
  std::size_t begin = 0;
  while (begin < records.size()) {
    std::size_t end = begin;
    while (end < records.size() && records[end].instance_id == records[begin].instance_id &&
           records[end].policy == records[begin].policy &&
           records[end].delta == records[begin].delta) {
      ++end;
    }
    const auto it = std::find_if(instances.begin(), instances.end(), [&](const NamedInstance& n) {
      return n.id == records[begin].instance_id;
    });
    if (it == instances.end()) throw ValidationError("record names an unknown instance");
    const Metrics m = aggregate(std::span(records).subspan(begin, end - begin),
                                it->instance.prior());
    nlohmann::json g = metrics_to_json(m);
    g["instance"] = records[begin].instance_id;
    g["policy"] = records[begin].policy;
    g["delta"] = records[begin].delta;
    capped += m.capped;
    out["groups"].push_back(std::move(g));
    begin = end;
  }
  out["capped"] = capped;
  const bool has_reference =
      std::any_of(records.begin(), records.end(),
                  [&](const TrialRecord& r) { return r.policy == cfg.reference_policy; });
  if (has_reference) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : accuracy_cost_curve(records, cfg.reference_policy)) {
      curve.push_back({{"policy", p.policy},
                       {"delta", p.delta},
                       {"trials", p.trials},
                       {"accuracy", p.accuracy},
                       {"mean_cost", p.mean_cost},
                       {"se_cost", p.se_cost},
                       {"norm_cost", p.norm_cost}});
    }
    out["curve"] = curve;
  }
  return out;
}

}  // namespace asht
