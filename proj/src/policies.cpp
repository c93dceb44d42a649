#include "asht/policies.hpp"

#include <algorithm>
#include <cmath>

#include "asht/baselines.hpp"
#include "asht/error.hpp"
#include "asht/fa.hpp"
#include "asht/rnb.hpp"

namespace asht {

const std::vector<std::string>& policy_kinds() {
  static const std::vector<std::string> kinds{"rnb", "rnb-exp", "fa", "fa-exp",
                                              "random", "nj", "nj-pa"};
  return kinds;
}

void validate_policy_spec(const PolicySpec& spec) {
  const auto& kinds = policy_kinds();
  if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end()) {
    throw ValidationError("unknown policy kind '" + spec.kind + "'");
  }
  if (spec.id().find(',') != std::string::npos) {
    throw ValidationError("policy label must not contain commas");
  }
  if (spec.saturation && !(*spec.saturation > 0.0)) {
    throw ValidationError("saturation must be positive");
  }
  if (spec.boost && *spec.boost < 1) throw ValidationError("boost must be at least 1");
  if (spec.multiplicity && *spec.multiplicity < 1) {
    throw ValidationError("multiplicity must be at least 1");
  }
  if (spec.eta < 1) throw ValidationError("eta must be at least 1");
  if (spec.stop && *spec.stop != "timestamps" && *spec.stop != "posterior") {
    throw ValidationError("stop must be 'timestamps' or 'posterior'");
  }
  if (spec.k_max < 1) throw ValidationError("k_max must be at least 1");
  if (!(spec.C > 0.0)) throw ValidationError("C must be positive");
  if (!(spec.r > 0.0 && spec.r < 1.0)) throw ValidationError("r must lie in (0,1)");
  if (!(spec.kl_cap > 0.0)) throw ValidationError("kl_cap must be positive");
}

PolicySpec policy_spec_from_json(const nlohmann::json& j) {
  PolicySpec s;
  if (j.is_string()) {
    s.kind = j.get<std::string>();
    validate_policy_spec(s);
    return s;
  }
  if (!j.is_object()) throw ValidationError("policy entry must be a string or an object");
  static const std::vector<std::string> known{"kind", "label", "saturation", "boost",
                                              "multiplicity", "eta", "stop", "k_max",
                                              "C", "r", "kl_cap", "alive_pairs"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("unknown policy key '" + key + "'");
    }
  }
  try {
    s.kind = j.at("kind").get<std::string>();
    s.label = j.value("label", std::string());
    if (j.contains("saturation")) s.saturation = j["saturation"].get<double>();
    if (j.contains("boost")) s.boost = j["boost"].get<std::size_t>();
    if (j.contains("multiplicity")) s.multiplicity = j["multiplicity"].get<std::size_t>();
    s.eta = j.value("eta", s.eta);
    if (j.contains("stop")) s.stop = j["stop"].get<std::string>();
    s.k_max = j.value("k_max", s.k_max);
    s.C = j.value("C", s.C);
    s.r = j.value("r", s.r);
    s.kl_cap = j.value("kl_cap", s.kl_cap);
    if (j.contains("alive_pairs")) s.alive_pairs = j["alive_pairs"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad policy entry: ") + e.what());
  }
  validate_policy_spec(s);
  return s;
}

nlohmann::json policy_spec_to_json(const PolicySpec& s) {
  nlohmann::json j;
  j["kind"] = s.kind;
  if (!s.label.empty()) j["label"] = s.label;
  if (s.saturation) j["saturation"] = *s.saturation;
  if (s.boost) j["boost"] = *s.boost;
  if (s.multiplicity) j["multiplicity"] = *s.multiplicity;
  j["eta"] = s.eta;
  if (s.stop) j["stop"] = *s.stop;
  j["k_max"] = s.k_max;
  j["C"] = s.C;
  j["r"] = s.r;
  j["kl_cap"] = s.kl_cap;
  if (s.alive_pairs) j["alive_pairs"] = *s.alive_pairs;
  return j;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Instance& inst, double delta) {
  validate_policy_spec(spec);
  if (spec.kind == "rnb") {
    RnBParams p = RnBParams::defaults(inst, delta);
    if (spec.saturation) p.saturation = *spec.saturation;
    if (spec.boost) p.boost = *spec.boost;
    if (spec.multiplicity) p.multiplicity = *spec.multiplicity;
    const StopRule rule =
        spec.stop.value_or("timestamps") == "timestamps" ? StopRule::Timestamps : StopRule::Posterior;
    return std::make_unique<RnbPolicy>(inst, build_plan(inst, p), rule, delta, spec.id());
  }
  if (spec.kind == "rnb-exp") {
    const double b = spec.saturation.value_or(
        std::log(static_cast<double>(inst.num_hypotheses()) / delta));
    const StopRule rule =
        spec.stop.value_or("posterior") == "timestamps" ? StopRule::Timestamps : StopRule::Posterior;
    return std::make_unique<RnbPolicy>(inst, build_plan_experiment(inst, b, spec.eta), rule, delta,
                                       spec.id());
  }
  if (spec.kind == "fa") return std::make_unique<FaTheoryPolicy>(inst, delta);
  if (spec.kind == "fa-exp") {
    return std::make_unique<FaExperimentPolicy>(inst, FaExperimentParams{spec.k_max, spec.C, delta});
  }
  if (spec.kind == "random") return std::make_unique<RandomPolicy>(inst, delta);
  NjParams p;
  p.r = spec.r;
  p.delta = delta;
  p.kl_cap = spec.kl_cap;
  p.adaptive = spec.kind == "nj";
  p.alive_pairs = spec.alive_pairs.value_or(p.adaptive);
  return std::make_unique<NjPolicy>(inst, p);
}

}  // namespace asht
