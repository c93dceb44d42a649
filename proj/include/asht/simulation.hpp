#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "asht/instance.hpp"

namespace asht {

/// SplitMix64 stream. Cheap to construct, so every (trial, purpose) pair gets
/// its own stream keyed by a derived seed.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on {0, ..., n-1}.
  std::size_t uniform_index(std::size_t n);
  double standard_normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Order-sensitive hash of a key tuple, used to derive stream seeds.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> key);

/// Purposes of the streams a trial draws from.
enum class StreamTag : std::uint64_t { TrueHypothesis = 1, Outcomes = 2, Policy = 3 };

double sample_outcome(const OutcomeFamily& family, double theta, RandomStream& rng);

/// Posterior over hypotheses kept as prior log-weights plus accumulated
/// log-likelihoods; probabilities are a softmax refreshed after every update.
class PosteriorState {
 public:
  explicit PosteriorState(std::span<const double> prior);

  /// Conditions on outcome y of action a. Throws NumericalError when every
  /// hypothesis gets zero likelihood.
  void update(const Instance& inst, std::size_t a, double y);

  std::span<const double> probabilities() const { return prob_; }
  double probability(std::size_t h) const { return prob_[h]; }
  double max_probability() const { return prob_[argmax_]; }
  /// Most probable hypothesis, lowest index on ties.
  std::size_t argmax() const { return argmax_; }
  std::size_t size() const { return prob_.size(); }
  std::size_t observations() const { return observations_; }

 private:
  void normalize();

  std::vector<double> log_weight_;
  std::vector<double> prob_;
  std::size_t argmax_ = 0;
  std::size_t observations_ = 0;
};

PosteriorState bayes_update(PosteriorState state, const Instance& inst, std::size_t a, double y);

/// Where a policy gets its observations from. Policies see outcomes only.
class OutcomeSource {
 public:
  virtual ~OutcomeSource() = default;
  /// Performs action a and returns its outcome.
  virtual double observe(std::size_t a) = 0;
  /// True once the selection budget is spent; the policy must answer now.
  virtual bool exhausted() const = 0;
};

inline constexpr std::size_t kDefaultSelectionCap = 1'000'000;

/// A simulated trial: outcomes are drawn from the true hypothesis, while cost
/// and selections are tallied.
class TrialEnvironment final : public OutcomeSource {
 public:
  TrialEnvironment(const Instance& inst, std::size_t true_h, RandomStream outcomes,
                   std::size_t selection_cap = kDefaultSelectionCap);

  double observe(std::size_t a) override;
  bool exhausted() const override { return steps_ >= cap_; }

  double cost() const { return cost_; }
  std::size_t steps() const { return steps_; }

 private:
  const Instance* inst_;
  std::size_t true_h_;
  RandomStream rng_;
  std::size_t cap_;
  double cost_ = 0.0;
  std::size_t steps_ = 0;
};

/// Replays a fixed outcome script; used to test stopping behaviour.
class ScriptedSource final : public OutcomeSource {
 public:
  explicit ScriptedSource(std::vector<double> outcomes) : outcomes_(std::move(outcomes)) {}

  double observe(std::size_t a) override;
  bool exhausted() const override { return next_ >= outcomes_.size(); }

  std::size_t consumed() const { return next_; }
  const std::vector<std::size_t>& actions() const { return actions_; }

 private:
  std::vector<double> outcomes_;
  std::vector<std::size_t> actions_;
  std::size_t next_ = 0;
};

/// An adaptive policy. Implementations hold only read-only state after
/// construction (or internally synchronized caches), so one object can serve
/// concurrent trials.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Runs one trial and returns the declared hypothesis. `rng` is the
  /// policy's private randomness.
  virtual std::size_t run(OutcomeSource& source, RandomStream& rng) const = 0;
};

}  // namespace asht
