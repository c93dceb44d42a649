#include "asht/fa.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "asht/error.hpp"
#include "asht/numeric.hpp"

namespace asht {

std::size_t worst_case_elimination(const Instance& inst, const AliveSet& alive, std::size_t a) {
  std::map<double, std::size_t> groups;
  for (auto h : alive.members()) ++groups[inst.mean(h, a)];
  const std::size_t total = alive.size();
  std::size_t worst = total;
  for (const auto& [omega, n] : groups) worst = std::min(worst, total - n);
  return worst;
}

double alive_pair_divergence(const Instance& inst, const AliveSet& alive, std::size_t a) {
  const auto members = alive.members();
  double sum = 0.0;
  for (auto h : members) {
    for (auto g : members) {
      if (h != g) sum += inst.divergence(h, g, a);
    }
  }
  return sum;
}

std::size_t odt_greedy_step(const Instance& inst, const AliveSet& alive) {
  std::size_t best = inst.num_actions();
  std::size_t best_elim = 0;
  double best_kl = 0.0;
  for (std::size_t a = 0; a < inst.num_actions(); ++a) {
    const std::size_t elim = worst_case_elimination(inst, alive, a);
    if (elim == 0) continue;
    if (best == inst.num_actions() || elim > best_elim) {
      best = a;
      best_elim = elim;
      best_kl = alive_pair_divergence(inst, alive, a);
    } else if (elim == best_elim) {
      const double kl = alive_pair_divergence(inst, alive, a);
      if (kl > best_kl) {
        best = a;
        best_kl = kl;
      }
    }
  }
  if (best == inst.num_actions()) throw ValidationError("no action splits the alive set");
  return best;
}

std::size_t theory_boost_count(double s_a, std::size_t num_h, double delta) {
  if (!(s_a > 0.0) || !std::isfinite(s_a)) {
    throw ValidationError("boost count needs a finite positive separation");
  }
  return std::max<std::size_t>(
      1, ceil_count(std::log(static_cast<double>(num_h) / delta) / s_a));
}

double round_to_outcome(double mean, std::span<const double> outcomes) {
  double best = outcomes.front();
  for (double w : outcomes) {
    if (std::abs(mean - w) < std::abs(mean - best)) best = w;
  }
  return best;
}

std::vector<double> outcome_values(const Instance& inst, std::size_t a) {
  std::vector<double> out;
  for (std::size_t h = 0; h < inst.num_hypotheses(); ++h) out.push_back(inst.mean(h, a));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TheoryRunResult run_theory(const Instance& inst, double delta, OutcomeSource& source) {
  if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("delta must lie in (0, 1/2)");
  const std::size_t num_h = inst.num_hypotheses();
  const SeparationReport sep = separation(inst);
  PosteriorState post(inst.prior());
  TheoryRunResult res;
  AliveSet alive = AliveSet::all(num_h);

  while (alive.size() > 1 && !source.exhausted()) {
    const std::size_t a = odt_greedy_step(inst, alive);
    const std::size_t reps = theory_boost_count(sep.per_action[a], num_h, delta);
    double sum = 0.0;
    std::size_t n = 0;
    for (; n < reps && !source.exhausted(); ++n) {
      const double y = source.observe(a);
      sum += y;
      post.update(inst, a, y);
      res.cost += inst.cost(a);
      ++res.steps;
    }
    if (n < reps) break;
    const auto omegas = outcome_values(inst, a);
    const double omega = round_to_outcome(sum / static_cast<double>(n), omegas);
    for (std::size_t h = 0; h < num_h; ++h) {
      if (alive.contains(h) && inst.mean(h, a) != omega) alive.erase(h);
    }
    ++res.iterations;
    if (alive.empty()) {
      alive = AliveSet::all(num_h);
      ++res.recoveries;
    }
    res.alive_trace.push_back(alive.size());
  }
  res.output = alive.size() == 1 ? alive.members().front() : post.argmax();
  return res;
}

double greedy_tree_cost(const Instance& inst) {
  const std::size_t num_h = inst.num_hypotheses();
  std::function<double(const AliveSet&)> cost = [&](const AliveSet& s) -> double {
    if (s.size() <= 1) return 0.0;
    const std::size_t a = odt_greedy_step(inst, s);
    std::map<double, AliveSet> parts;
    double mass = 0.0;
    for (auto h : s.members()) {
      auto it = parts.try_emplace(inst.mean(h, a), num_h).first;
      it->second.insert(h);
      mass += inst.prior(h);
    }
    double total = inst.cost(a);
    for (const auto& [omega, part] : parts) {
      double pm = 0.0;
      for (auto h : part.members()) pm += inst.prior(h);
      if (mass > 0.0) total += pm / mass * cost(part);
    }
    return total;
  };
  return cost(AliveSet::all(num_h));
}

void FaExperimentParams::validate() const {
  if (k_max < 1) throw ValidationError("k_max must be at least 1");
  if (!(C > 0.0)) throw ValidationError("C must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
}

namespace {

bool in_elimination_set(double mu, double mbar, double radius) {
  return std::abs(mu - mbar) >= radius;
}

double radius(double C, std::size_t k) { return C / std::sqrt(static_cast<double>(k)); }

// Shared selection over precomputed or on-the-fly scores.
template <class Score>
MetaTest choose_meta_test(const Instance& inst, const AliveSet& alive, std::size_t k_max,
                          Score&& score) {
  const std::size_t num_a = inst.num_actions();
  double best = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> ties;
  for (std::size_t a = 0; a < num_a; ++a) {
    // An action that splits no alive pair can still eliminate everyone.
    if (alive_pair_divergence(inst, alive, a) == 0.0) continue;
    for (std::size_t k = 1; k <= k_max; ++k) {
      const double v = score(a, k);
      if (v > best) {
        best = v;
        ties.clear();
      }
      if (v == best && v > 0.0) ties.emplace_back(a, k);
    }
  }

  std::size_t action = num_a;
  std::size_t reps = 1;
  if (ties.empty()) {
    double best_kl = -1.0;
    for (std::size_t a = 0; a < num_a; ++a) {
      const double kl = alive_pair_divergence(inst, alive, a);
      if (kl > best_kl) {
        best_kl = kl;
        action = a;
      }
    }
  } else if (ties.front().first == ties.back().first) {
    action = ties.front().first;
    reps = ties.front().second;
  } else {
    double best_kl = -1.0;
    for (const auto& [a, k] : ties) {
      if (a == action) continue;
      const double kl = alive_pair_divergence(inst, alive, a);
      if (kl > best_kl) {
        best_kl = kl;
        action = a;
        reps = k;
      }
    }
  }
  return {action, reps, static_cast<double>(reps) * inst.cost(action)};
}

}  // namespace

MetaTest fa_experiment_step(const Instance& inst, std::span<const double> posterior,
                            const FaExperimentParams& params) {
  params.validate();
  const AliveSet alive = posterior_alive_set(posterior, params.delta);
  const auto members = alive.members();
  return choose_meta_test(inst, alive, params.k_max, [&](std::size_t a, std::size_t k) {
    const double r = radius(params.C, k);
    std::size_t worst = members.size();
    for (std::size_t m = 0; m <= k; ++m) {
      const double mbar = static_cast<double>(m) / static_cast<double>(k);
      std::size_t n = 0;
      for (auto h : members) n += in_elimination_set(inst.mean(h, a), mbar, r) ? 1 : 0;
      worst = std::min(worst, n);
    }
    return static_cast<double>(worst) / (static_cast<double>(k) * inst.cost(a));
  });
}

FaTheoryPolicy::FaTheoryPolicy(const Instance& inst, double delta) : inst_(&inst), delta_(delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("delta must lie in (0, 1/2)");
}

std::size_t FaTheoryPolicy::run(OutcomeSource& source, RandomStream&) const {
  return run_theory(*inst_, delta_, source).output;
}

FaExperimentPolicy::FaExperimentPolicy(const Instance& inst, FaExperimentParams params)
    : inst_(&inst), params_(params) {
  params_.validate();
  const std::size_t num_h = inst.num_hypotheses();
  for (std::size_t a = 0; a < inst.num_actions(); ++a) {
    for (std::size_t k = 1; k <= params_.k_max; ++k) {
      offset_.push_back(masks_.size());
      const double r = radius(params_.C, k);
      for (std::size_t m = 0; m <= k; ++m) {
        const double mbar = static_cast<double>(m) / static_cast<double>(k);
        AliveSet e(num_h);
        for (std::size_t h = 0; h < num_h; ++h) {
          if (in_elimination_set(inst.mean(h, a), mbar, r)) e.insert(h);
        }
        masks_.push_back(std::move(e));
      }
    }
  }
}

MetaTest FaExperimentPolicy::step(std::span<const double> posterior) const {
  const AliveSet alive = posterior_alive_set(posterior, params_.delta);
  return choose_meta_test(*inst_, alive, params_.k_max, [&](std::size_t a, std::size_t k) {
    std::size_t worst = alive.size();
    for (std::size_t m = 0; m <= k; ++m) {
      worst = std::min(worst, mask(a, k, m).intersection_size(alive));
    }
    return static_cast<double>(worst) / (static_cast<double>(k) * inst_->cost(a));
  });
}

std::size_t FaExperimentPolicy::run(OutcomeSource& source, RandomStream&) const {
  PosteriorState post(inst_->prior());
  const double target = 1.0 - params_.delta;
  while (post.max_probability() < target && !source.exhausted()) {
    const MetaTest mt = step(post.probabilities());
    for (std::size_t i = 0; i < mt.repetitions && !source.exhausted(); ++i) {
      post.update(*inst_, mt.action, source.observe(mt.action));
    }
  }
  return post.argmax();
}

}  // namespace asht
