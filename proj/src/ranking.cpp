#include "asht/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "asht/error.hpp"
#include "asht/numeric.hpp"

namespace asht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clipped(double collected, double saturation) {
  return std::min(1.0, collected / saturation);
}

}  // namespace

CoverFunction::CoverFunction(const Instance& inst, std::size_t h, double saturation)
    : inst_(&inst), h_(h), saturation_(saturation) {
  if (!(saturation > 0.0)) throw ValidationError("saturation level B must be positive");
  if (h >= inst.num_hypotheses()) throw ValidationError("hypothesis index out of range");
}

double CoverFunction::eval(std::span<const std::size_t> counts) const {
  const std::size_t num_h = inst_->num_hypotheses();
  if (num_h == 1) return 1.0;
  double total = 0.0;
  for (std::size_t g = 0; g < num_h; ++g) {
    if (g == h_) continue;
    const auto d = inst_->divergences(g, h_);
    double collected = 0.0;
    for (std::size_t a = 0; a < counts.size(); ++a) {
      if (counts[a] != 0) collected += static_cast<double>(counts[a]) * d[a];
    }
    total += clipped(collected, saturation_);
  }
  return total / static_cast<double>(num_h - 1);
}

bool CoverFunction::saturated(std::span<const std::size_t> counts) const {
  const std::size_t num_h = inst_->num_hypotheses();
  for (std::size_t g = 0; g < num_h; ++g) {
    if (g == h_) continue;
    const auto d = inst_->divergences(g, h_);
    double collected = 0.0;
    for (std::size_t a = 0; a < counts.size(); ++a) {
      if (counts[a] != 0) collected += static_cast<double>(counts[a]) * d[a];
    }
    if (collected < saturation_) return false;
  }
  return true;
}

double eval_cover(const CoverFunction& f, std::span<const std::size_t> counts) {
  return f.eval(counts);
}

std::optional<std::size_t> cover_time(const CoverFunction& f,
                                      std::span<const std::size_t> sequence) {
  std::vector<std::size_t> counts(f.instance().num_actions(), 0);
  if (f.saturated(counts)) return 0;
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    ++counts[sequence[t]];
    if (f.saturated(counts)) return t + 1;
  }
  return std::nullopt;
}

CoverageState::CoverageState(const Instance& inst, double saturation)
    : inst_(&inst),
      saturation_(saturation),
      num_h_(inst.num_hypotheses()),
      acc_(num_h_ * num_h_, 0.0),
      covered_(num_h_, 0) {
  if (!(saturation > 0.0)) throw ValidationError("saturation level B must be positive");
  for (std::size_t h = 0; h < num_h_; ++h) {
    // With |H| = 1 there is no pair to cover.
    covered_[h] = num_h_ == 1 ? 1 : 0;
    if (!covered_[h]) ++uncovered_count_;
  }
}

double CoverageState::value(std::size_t h) const {
  if (covered_[h]) return 1.0;
  double total = 0.0;
  for (std::size_t g = 0; g < num_h_; ++g) {
    if (g != h) total += clipped(pair_sum(g, h), saturation_);
  }
  return total / static_cast<double>(num_h_ - 1);
}

bool CoverageState::covered(std::size_t h) const { return covered_[h] != 0; }

double CoverageState::score(std::size_t a) const {
  double score = 0.0;
  for (std::size_t h = 0; h < num_h_; ++h) {
    if (covered_[h]) continue;
    double before = 0.0;
    double gain = 0.0;
    for (std::size_t g = 0; g < num_h_; ++g) {
      if (g == h) continue;
      const double collected = pair_sum(g, h);
      const double now = clipped(collected, saturation_);
      before += now;
      const double d = inst_->divergence(g, h, a);
      if (d > 0.0 && now < 1.0) gain += clipped(collected + d, saturation_) - now;
    }
    const double scale = static_cast<double>(num_h_ - 1);
    const double f_before = before / scale;
    score += inst_->prior(h) * (gain / scale) / (1.0 - f_before);
  }
  return score;
}

double CoverageState::tie_key(std::size_t a) const {
  const bool any_open = uncovered_count_ > 0;
  double key = 0.0;
  for (std::size_t g = 0; g < num_h_; ++g) {
    for (std::size_t h = 0; h < num_h_; ++h) {
      if (g == h) continue;
      if (any_open && pair_sum(g, h) >= saturation_) continue;
      key += inst_->divergence(g, h, a);
    }
  }
  return key;
}

std::vector<std::size_t> CoverageState::add(std::size_t a) {
  std::vector<std::size_t> newly;
  for (std::size_t g = 0; g < num_h_; ++g) {
    for (std::size_t h = 0; h < num_h_; ++h) {
      if (g != h) acc_[g * num_h_ + h] += inst_->divergence(g, h, a);
    }
  }
  for (std::size_t h = 0; h < num_h_; ++h) {
    if (covered_[h]) continue;
    bool done = true;
    for (std::size_t g = 0; g < num_h_ && done; ++g) {
      if (g != h && pair_sum(g, h) < saturation_) done = false;
    }
    if (done) {
      covered_[h] = 1;
      --uncovered_count_;
      newly.push_back(h);
    }
  }
  return newly;
}

double RankedSequence::weighted_cover_time(const Instance& inst) const {
  double total = 0.0;
  for (std::size_t h = 0; h < cover_times.size(); ++h) {
    if (!cover_times[h]) return kInf;
    total += inst.prior(h) * static_cast<double>(*cover_times[h]);
  }
  return total;
}

nlohmann::json ranked_sequence_to_json(const RankedSequence& seq, const Instance& inst) {
  nlohmann::json j;
  j["actions"] = nlohmann::json::array();
  for (std::size_t a : seq.actions) j["actions"].push_back(inst.actions()[a]);
  j["cover_times"] = nlohmann::json::object();
  for (std::size_t h = 0; h < seq.cover_times.size(); ++h) {
    const auto& name = inst.hypotheses()[h];
    if (seq.cover_times[h]) {
      j["cover_times"][name] = *seq.cover_times[h];
    } else {
      j["cover_times"][name] = nullptr;
    }
  }
  j["uncovered"] = nlohmann::json::array();
  for (std::size_t h : seq.uncovered) j["uncovered"].push_back(inst.hypotheses()[h]);
  return j;
}

std::size_t greedy_choice(const CoverageState& state, std::span<const std::size_t> candidates) {
  std::size_t best = candidates.front();
  double best_score = state.score(best);
  double best_key = state.tie_key(best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const std::size_t a = candidates[i];
    const double sc = state.score(a);
    if (sc < best_score) continue;
    const double key = state.tie_key(a);
    if (sc > best_score || key > best_key || (key == best_key && a < best)) {
      best = a;
      best_score = sc;
      best_key = key;
    }
  }
  return best;
}

namespace {

void record_cover_times(RankedSequence& seq, const std::vector<std::size_t>& newly) {
  for (std::size_t h : newly) seq.cover_times[h] = seq.actions.size();
}

void finish(RankedSequence& seq, const CoverageState& state, std::size_t num_h) {
  for (std::size_t h = 0; h < num_h; ++h) {
    if (!state.covered(h)) seq.uncovered.push_back(h);
  }
}

}  // namespace

RankedSequence gre_rank(const Instance& inst, double saturation, std::size_t multiplicity) {
  if (multiplicity < 1) throw ValidationError("multiplicity M must be at least 1");
  const std::size_t num_h = inst.num_hypotheses();
  const std::size_t num_a = inst.num_actions();
  CoverageState state(inst, saturation);
  RankedSequence seq;
  seq.cover_times.assign(num_h, std::nullopt);
  for (std::size_t h = 0; h < num_h; ++h) {
    if (state.covered(h)) seq.cover_times[h] = 0;
  }
  std::vector<std::size_t> remaining(num_a, multiplicity);
  std::vector<std::size_t> candidates;
  while (!state.all_covered()) {
    candidates.clear();
    for (std::size_t a = 0; a < num_a; ++a) {
      if (remaining[a] > 0) candidates.push_back(a);
    }
    if (candidates.empty()) break;
    const std::size_t a = greedy_choice(state, candidates);
    if (!(state.score(a) > 0.0)) break;
    --remaining[a];
    seq.actions.push_back(a);
    record_cover_times(seq, state.add(a));
  }
  finish(seq, state, num_h);
  return seq;
}

RankedSequence gre_rank_with_replacement(const Instance& inst, double saturation,
                                         std::size_t steps) {
  const std::size_t num_h = inst.num_hypotheses();
  const std::size_t num_a = inst.num_actions();
  CoverageState state(inst, saturation);
  RankedSequence seq;
  seq.cover_times.assign(num_h, std::nullopt);
  for (std::size_t h = 0; h < num_h; ++h) {
    if (state.covered(h)) seq.cover_times[h] = 0;
  }
  std::vector<std::size_t> all(num_a);
  std::iota(all.begin(), all.end(), std::size_t{0});
  // Once everything is covered every score is zero and the tie key runs over
  // all pairs, so the choice no longer changes.
  std::optional<std::size_t> settled;
  for (std::size_t t = 0; t < steps; ++t) {
    std::size_t a = 0;
    if (state.all_covered()) {
      if (!settled) settled = greedy_choice(state, all);
      a = *settled;
    } else {
      a = greedy_choice(state, all);
    }
    seq.actions.push_back(a);
    record_cover_times(seq, state.add(a));
  }
  finish(seq, state, num_h);
  return seq;
}

std::size_t default_multiplicity(const Instance& inst, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
  const double num_h = static_cast<double>(inst.num_hypotheses());
  if (inst.num_hypotheses() == 1) return 1;
  const double s = separation(inst).s;
  return std::max<std::size_t>(1, ceil_count(num_h * num_h * std::log(num_h / delta) / s));
}

double min_marginal_epsilon(const Instance& inst, double saturation, std::size_t multiplicity,
                            std::size_t max_states) {
  if (!(saturation > 0.0)) throw ValidationError("saturation level B must be positive");
  const std::size_t num_h = inst.num_hypotheses();
  const std::size_t num_a = inst.num_actions();
  if (num_h < 2) throw ValidationError("no positive marginal exists with a single hypothesis");

  double states = 1.0;
  for (std::size_t a = 0; a < num_a; ++a) states *= static_cast<double>(multiplicity + 1);
  if (states > static_cast<double>(max_states)) {
    throw SizeGuardError("min_marginal_epsilon: " + std::to_string(states) +
                         " multisets exceed the enumeration budget");
  }

  // Walk all count vectors in mixed radix. Pair sums are rebuilt per state so
  // unbounded divergences never meet a subtraction.
  std::vector<std::size_t> counts(num_a, 0);
  std::vector<double> acc(num_h * num_h, 0.0);
  const double scale = static_cast<double>(num_h - 1);
  double best = kInf;
  for (;;) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t a = 0; a < num_a; ++a) {
      if (counts[a] == 0) continue;
      for (std::size_t g = 0; g < num_h; ++g) {
        for (std::size_t h = 0; h < num_h; ++h) {
          if (g != h) acc[g * num_h + h] += static_cast<double>(counts[a]) * inst.divergence(g, h, a);
        }
      }
    }
    for (std::size_t u = 0; u < num_a; ++u) {
      if (counts[u] >= multiplicity) continue;
      for (std::size_t h = 0; h < num_h; ++h) {
        double gain = 0.0;
        for (std::size_t g = 0; g < num_h; ++g) {
          if (g == h) continue;
          const double collected = acc[g * num_h + h];
          gain += clipped(collected + inst.divergence(g, h, u), saturation) -
                  clipped(collected, saturation);
        }
        gain /= scale;
        if (gain > 0.0) best = std::min(best, gain);
      }
    }
    std::size_t digit = 0;
    while (digit < num_a && counts[digit] == multiplicity) counts[digit++] = 0;
    if (digit == num_a) break;
    ++counts[digit];
  }
  if (!(best < kInf)) throw ValidationError("no strictly positive marginal increment exists");
  return best;
}

}  // namespace asht
