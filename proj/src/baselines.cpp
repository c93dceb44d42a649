#include "asht/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asht/error.hpp"
#include "asht/simplex.hpp"

namespace asht {

ActionDistribution max_min_distribution(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("max-min problem needs at least one row");
  const std::size_t num_a = rows.front().size();
  const std::size_t num_p = rows.size();
  ActionDistribution out;
  for (const auto& r : rows) {
    if (r.size() != num_a) throw ValidationError("ragged max-min matrix");
    if (std::all_of(r.begin(), r.end(), [](double v) { return v <= 0.0; })) {
      out.degenerate = true;
    }
  }
  if (out.degenerate) {
    out.weights.assign(num_a, 1.0 / static_cast<double>(num_a));
    return out;
  }

  LinearProgram lp;
  lp.maximize = true;
  lp.objective.assign(num_p, 1.0);
  for (std::size_t a = 0; a < num_a; ++a) {
    LinearConstraint c;
    c.coeffs.resize(num_p);
    for (std::size_t p = 0; p < num_p; ++p) c.coeffs[p] = rows[p][a];
    c.rel = Relation::LessEqual;
    c.rhs = 1.0;
    lp.constraints.push_back(std::move(c));
  }
  const LpSolution sol = solve_lp(lp, PivotRule::Dantzig);
  if (sol.status != LpStatus::Optimal || !(sol.objective > 0.0)) {
    throw NumericalError("max-min LP did not reach an optimum");
  }
  double total = 0.0;
  out.weights.resize(num_a);
  for (std::size_t a = 0; a < num_a; ++a) {
    out.weights[a] = std::max(0.0, sol.duals[a]);
    total += out.weights[a];
  }
  for (auto& w : out.weights) w /= total;
  // Report the value the normalized weights actually attain.
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    double v = 0.0;
    for (std::size_t a = 0; a < num_a; ++a) v += out.weights[a] * r[a];
    out.value = std::min(out.value, v);
  }
  return out;
}

namespace {

double capped(double d, double cap, std::size_t& n) {
  if (d > cap) {
    ++n;
    return cap;
  }
  return d;
}

}  // namespace

ActionDistribution nj_phase1_distribution(const Instance& inst, const AliveSet& alive,
                                          double kl_cap) {
  const auto members = alive.members();
  if (members.size() < 2) throw ValidationError("phase 1 needs at least two alive hypotheses");
  std::size_t n_capped = 0;
  std::vector<std::vector<double>> rows;
  for (auto h : members) {
    for (auto g : members) {
      if (h == g) continue;
      std::vector<double> row(inst.num_actions());
      for (std::size_t a = 0; a < row.size(); ++a) {
        row[a] = capped(inst.divergence(h, g, a), kl_cap, n_capped);
      }
      rows.push_back(std::move(row));
    }
  }
  ActionDistribution d = max_min_distribution(rows);
  d.capped_entries = n_capped;
  return d;
}

ActionDistribution nj_phase2_distribution(const Instance& inst, std::size_t leader,
                                          const AliveSet& alive, double kl_cap) {
  if (!alive.contains(leader)) throw ValidationError("phase 2 leader must be alive");
  if (alive.size() < 2) throw ValidationError("phase 2 needs at least two alive hypotheses");
  std::size_t n_capped = 0;
  std::vector<std::vector<double>> rows;
  for (auto g : alive.members()) {
    if (g == leader) continue;
    std::vector<double> row(inst.num_actions());
    for (std::size_t a = 0; a < row.size(); ++a) {
      row[a] = capped(inst.divergence(leader, g, a), kl_cap, n_capped);
    }
    rows.push_back(std::move(row));
  }
  ActionDistribution d = max_min_distribution(rows);
  d.capped_entries = n_capped;
  return d;
}

std::size_t random_policy_step(const Instance& inst, RandomStream& rng) {
  return rng.uniform_index(inst.num_actions());
}

std::size_t sample_index(std::span<const double> weights, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

RandomPolicy::RandomPolicy(const Instance& inst, double delta) : inst_(&inst), delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
}

std::size_t RandomPolicy::run(OutcomeSource& source, RandomStream& rng) const {
  PosteriorState post(inst_->prior());
  while (post.max_probability() < 1.0 - delta_ && !source.exhausted()) {
    const std::size_t a = random_policy_step(*inst_, rng);
    post.update(*inst_, a, source.observe(a));
  }
  return post.argmax();
}

void NjParams::validate() const {
  if (!(r > 0.0 && r < 1.0)) throw ValidationError("NJ threshold r must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
  if (!(kl_cap > 0.0)) throw ValidationError("KL cap must be positive");
}

std::size_t NjController::KeyHash::operator()(const Key& k) const {
  return AliveSetHash{}(k.alive) * 31 + k.leader;
}

NjController::NjController(const Instance& inst, NjParams params)
    : inst_(&inst), params_(params) {
  params_.validate();
}

std::shared_ptr<const ActionDistribution> NjController::distribution(
    const PosteriorState& post) const {
  const std::size_t num_h = inst_->num_hypotheses();
  const bool phase2 = params_.adaptive && post.max_probability() >= params_.r;
  Key key{phase2 ? post.argmax() : num_h,
          params_.alive_pairs ? posterior_alive_set(post.probabilities(), params_.delta)
                              : AliveSet::all(num_h)};
  if (phase2) key.alive.insert(key.leader);
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto d = std::make_shared<const ActionDistribution>(
      phase2 ? nj_phase2_distribution(*inst_, key.leader, key.alive, params_.kl_cap)
             : nj_phase1_distribution(*inst_, key.alive, params_.kl_cap));
  std::lock_guard lock(mutex_);
  return cache_.try_emplace(std::move(key), std::move(d)).first->second;
}

std::optional<std::size_t> NjController::step(const PosteriorState& post,
                                              RandomStream& rng) const {
  if (post.max_probability() >= 1.0 - params_.delta) return std::nullopt;
  const auto d = distribution(post);
  return sample_index(d->weights, rng);
}

NjPolicy::NjPolicy(const Instance& inst, NjParams params)
    : inst_(&inst), controller_(inst, params) {}

std::size_t NjPolicy::run(OutcomeSource& source, RandomStream& rng) const {
  PosteriorState post(inst_->prior());
  while (!source.exhausted()) {
    const auto a = controller_.step(post, rng);
    if (!a) break;
    post.update(*inst_, *a, source.observe(*a));
  }
  return post.argmax();
}

}  // namespace asht
