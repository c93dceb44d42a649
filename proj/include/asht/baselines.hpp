#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "asht/alive_set.hpp"
#include "asht/instance.hpp"
#include "asht/simulation.hpp"

namespace asht {

/// Mixed strategy over actions and the max-min value it attains.
struct ActionDistribution {
  std::vector<double> weights;
  double value = 0.0;
  /// Some pair has zero divergence on every action; value is 0 and the
  /// weights are uniform.
  bool degenerate = false;
  /// Number of divergence entries that were clamped to the cap.
  std::size_t capped_entries = 0;
};

/// max over lambda in the simplex of min_p sum_a lambda(a) rows[p][a], solved
/// as the packing LP max 1^T y s.t. rows^T y <= 1, y >= 0. The value is
/// 1 / 1^T y and lambda is the normalized dual.
ActionDistribution max_min_distribution(const std::vector<std::vector<double>>& rows);

inline constexpr double kDefaultKlCap = 50.0;

/// Pairs are all ordered (h, g) in alive with h != g.
ActionDistribution nj_phase1_distribution(const Instance& inst, const AliveSet& alive,
                                          double kl_cap = kDefaultKlCap);
/// Pairs are (leader, g) for g in alive other than the leader.
ActionDistribution nj_phase2_distribution(const Instance& inst, std::size_t leader,
                                          const AliveSet& alive, double kl_cap = kDefaultKlCap);

std::size_t random_policy_step(const Instance& inst, RandomStream& rng);

/// Draws an index from a probability vector.
std::size_t sample_index(std::span<const double> weights, RandomStream& rng);

class RandomPolicy final : public Policy {
 public:
  RandomPolicy(const Instance& inst, double delta);

  std::string name() const override { return "random"; }
  std::size_t run(OutcomeSource& source, RandomStream& rng) const override;

 private:
  const Instance* inst_;
  double delta_;
};

struct NjParams {
  /// Phase-switch threshold r on the posterior maximum.
  double r = 0.1;
  double delta = 0.05;
  double kl_cap = kDefaultKlCap;
  /// False gives the partially adaptive variant (phase 1 only).
  bool adaptive = true;
  /// Restrict pairs to the alive set {h : posterior(h) > delta/|H|}; when
  /// false every pair of hypotheses counts and phase 1 never changes.
  bool alive_pairs = true;

  void validate() const;
};

/// Chooses the next action from the posterior; caches distributions per
/// (phase, leader, alive set). Safe to share between threads.
class NjController {
 public:
  NjController(const Instance& inst, NjParams params);

  /// nullopt once the posterior maximum reaches 1 - delta.
  std::optional<std::size_t> step(const PosteriorState& post, RandomStream& rng) const;
  /// The distribution step() samples from.
  std::shared_ptr<const ActionDistribution> distribution(const PosteriorState& post) const;
  const NjParams& params() const { return params_; }

 private:
  struct Key {
    std::size_t leader;  // num_h for phase 1
    AliveSet alive;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  const Instance* inst_;
  NjParams params_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<Key, std::shared_ptr<const ActionDistribution>, KeyHash> cache_;
};

class NjPolicy final : public Policy {
 public:
  NjPolicy(const Instance& inst, NjParams params);

  std::string name() const override { return controller_.params().adaptive ? "nj" : "nj-pa"; }
  std::size_t run(OutcomeSource& source, RandomStream& rng) const override;

 private:
  const Instance* inst_;
  NjController controller_;
};

}  // namespace asht
