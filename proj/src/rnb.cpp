#include "asht/rnb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asht/error.hpp"
#include "asht/numeric.hpp"

namespace asht {

RnBParams RnBParams::defaults(const Instance& inst, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
  RnBParams p;
  p.delta = delta;
  const double log_inv = std::log(1.0 / delta);
  p.boost = std::max<std::size_t>(
      1, ceil_count(1.0 + std::log(static_cast<double>(inst.num_hypotheses())) / log_inv));
  p.saturation = 0.5 * log_inv;
  p.multiplicity = default_multiplicity(inst, delta);
  return p;
}

void RnBParams::validate() const {
  if (!(delta > 0.0 && delta <= 0.25)) throw ValidationError("RnB delta must lie in (0, 1/4]");
  if (!(saturation > 0.0)) throw ValidationError("saturation B must be positive");
  if (saturation > 0.5 * std::log(1.0 / delta) * (1.0 + 1e-12)) {
    throw ValidationError("saturation B must not exceed ln(1/delta)/2");
  }
  if (boost < 1) throw ValidationError("boosting intensity must be at least 1");
  if (multiplicity < 1) throw ValidationError("multiplicity M must be at least 1");
}

namespace {

RnBPlan assemble(const Instance& inst, const RankedSequence& seq, std::size_t boost,
                 double saturation) {
  RnBPlan plan;
  plan.ranked = seq.actions;
  plan.boost = boost;
  plan.saturation = saturation;
  plan.boosted.reserve(seq.actions.size() * boost);
  for (auto a : seq.actions) plan.boosted.insert(plan.boosted.end(), boost, a);
  plan.timestamps.resize(inst.num_hypotheses());
  for (std::size_t h = 0; h < inst.num_hypotheses(); ++h) {
    if (seq.cover_times[h]) plan.timestamps[h] = *seq.cover_times[h] * boost;
  }
  plan.uncovered = seq.uncovered;
  return plan;
}

// log Lambda(h,g) from accumulated log-likelihoods, with -inf handled.
double log_ratio(double lh, double lg) {
  if (lh == -std::numeric_limits<double>::infinity()) return lh;
  if (lg == -std::numeric_limits<double>::infinity()) return std::numeric_limits<double>::infinity();
  return lh - lg;
}

std::size_t posterior_argmax(const Instance& inst, const std::vector<double>& loglik) {
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < inst.num_hypotheses(); ++h) {
    const double v = std::log(inst.prior(h)) + loglik[h];
    if (v > best_v) {
      best_v = v;
      best = h;
    }
  }
  return best;
}

}  // namespace

RnBPlan build_plan(const Instance& inst, const RnBParams& params) {
  params.validate();
  const RankedSequence seq = gre_rank(inst, params.saturation, params.multiplicity);
  return assemble(inst, seq, params.boost, params.saturation);
}

std::size_t first_occurrence_prefix(const std::vector<std::size_t>& sequence) {
  std::vector<std::size_t> seen;
  std::size_t length = 0;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (std::find(seen.begin(), seen.end(), sequence[i]) == seen.end()) {
      seen.push_back(sequence[i]);
      length = i + 1;
    }
  }
  return length;
}

RnBPlan build_plan_experiment(const Instance& inst, double saturation, std::size_t eta) {
  if (eta < 1) throw ValidationError("eta must be at least 1");
  if (!(saturation > 0.0)) throw ValidationError("saturation B must be positive");
  RankedSequence seq = gre_rank_with_replacement(inst, saturation, eta);
  seq.actions.resize(first_occurrence_prefix(seq.actions));
  // Cover times against the truncated sequence.
  seq.uncovered.clear();
  for (std::size_t h = 0; h < inst.num_hypotheses(); ++h) {
    seq.cover_times[h] = cover_time(CoverFunction(inst, h, saturation), seq.actions);
    if (!seq.cover_times[h]) seq.uncovered.push_back(h);
  }
  return assemble(inst, seq, 1, saturation);
}

nlohmann::json plan_to_json(const RnBPlan& plan, const Instance& inst) {
  nlohmann::json j;
  std::vector<std::string> ranked;
  for (auto a : plan.ranked) ranked.push_back(inst.actions()[a]);
  j["ranked"] = ranked;
  j["alpha"] = plan.boost;
  j["B"] = plan.saturation;
  j["boosted_length"] = plan.boosted.size();
  nlohmann::json ts = nlohmann::json::object();
  for (std::size_t h = 0; h < plan.timestamps.size(); ++h) {
    if (plan.timestamps[h]) ts[inst.hypotheses()[h]] = *plan.timestamps[h];
    else ts[inst.hypotheses()[h]] = nullptr;
  }
  j["timestamps"] = ts;
  std::vector<std::string> uncovered;
  for (auto h : plan.uncovered) uncovered.push_back(inst.hypotheses()[h]);
  j["uncovered"] = uncovered;
  return j;
}

ExecutionResult execute(const RnBPlan& plan, const Instance& inst, OutcomeSource& source) {
  const std::size_t num_h = inst.num_hypotheses();
  const double threshold = 0.5 * static_cast<double>(plan.boost) * plan.saturation;

  // Hypotheses ordered by timestamp, then index.
  std::vector<std::size_t> order;
  for (std::size_t h = 0; h < num_h; ++h) {
    if (plan.timestamps[h]) order.push_back(h);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return *plan.timestamps[x] < *plan.timestamps[y];
  });

  std::vector<double> loglik(num_h, 0.0);
  ExecutionResult res;
  auto triggers = [&](std::size_t h) {
    for (std::size_t g = 0; g < num_h; ++g) {
      if (g != h && !(log_ratio(loglik[h], loglik[g]) >= threshold)) return false;
    }
    return true;
  };

  std::size_t next = 0;
  std::size_t t = 0;
  while (true) {
    while (next < order.size() && *plan.timestamps[order[next]] == t) {
      const std::size_t h = order[next++];
      if (triggers(h)) {
        res.output = h;
        res.triggered = true;
        return res;
      }
    }
    if (next == order.size() || t == plan.boosted.size() || source.exhausted()) break;
    const std::size_t a = plan.boosted[t];
    const double y = source.observe(a);
    res.cost += inst.cost(a);
    ++res.steps;
    for (std::size_t h = 0; h < num_h; ++h) {
      loglik[h] += log_likelihood(inst.family(), inst.mean(h, a), y);
    }
    ++t;
  }
  res.output = posterior_argmax(inst, loglik);
  return res;
}

ExecutionResult execute_posterior(const RnBPlan& plan, const Instance& inst, double delta,
                                  OutcomeSource& source) {
  PosteriorState post(inst.prior());
  ExecutionResult res;
  const double target = 1.0 - delta;
  std::size_t t = 0;
  while (post.max_probability() < target && !plan.boosted.empty() && !source.exhausted()) {
    const std::size_t a = plan.boosted[t % plan.boosted.size()];
    post.update(inst, a, source.observe(a));
    res.cost += inst.cost(a);
    ++res.steps;
    ++t;
  }
  res.triggered = post.max_probability() >= target;
  res.output = post.argmax();
  return res;
}

RnbPolicy::RnbPolicy(const Instance& inst, RnBPlan plan, StopRule rule, double delta,
                     std::string name)
    : inst_(&inst), plan_(std::move(plan)), rule_(rule), delta_(delta), name_(std::move(name)) {}

std::size_t RnbPolicy::run(OutcomeSource& source, RandomStream&) const {
  if (rule_ == StopRule::Timestamps) return execute(plan_, *inst_, source).output;
  return execute_posterior(plan_, *inst_, delta_, source).output;
}

}  // namespace asht
