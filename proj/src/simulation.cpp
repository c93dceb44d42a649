#include "asht/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "asht/error.hpp"

namespace asht {

namespace {

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

RandomStream::result_type RandomStream::operator()() { return splitmix(state_); }

double RandomStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  // Lemire's multiply-shift with rejection.
  const std::uint64_t range = n;
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

double RandomStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> key) {
  std::uint64_t state = 0x6a09e667f3bcc908ull;
  std::uint64_t out = splitmix(state);
  for (auto k : key) {
    state ^= k + 0x9e3779b97f4a7c15ull + (out << 6) + (out >> 2);
    out = splitmix(state);
  }
  return out;
}

double sample_outcome(const OutcomeFamily& family, double theta, RandomStream& rng) {
  if (family.kind == FamilyKind::Bernoulli) return rng.uniform() < theta ? 1.0 : 0.0;
  return theta + rng.standard_normal();
}

PosteriorState::PosteriorState(std::span<const double> prior)
    : log_weight_(prior.size()), prob_(prior.size()) {
  if (prior.empty()) throw ValidationError("posterior over an empty hypothesis set");
  for (std::size_t h = 0; h < prior.size(); ++h) log_weight_[h] = std::log(prior[h]);
  normalize();
}

void PosteriorState::update(const Instance& inst, std::size_t a, double y) {
  for (std::size_t h = 0; h < log_weight_.size(); ++h) {
    log_weight_[h] += log_likelihood(inst.family(), inst.mean(h, a), y);
  }
  ++observations_;
  normalize();
}

void PosteriorState::normalize() {
  const double top = *std::max_element(log_weight_.begin(), log_weight_.end());
  if (!std::isfinite(top)) {
    throw NumericalError("posterior collapsed: every hypothesis has zero likelihood");
  }
  double total = 0.0;
  for (std::size_t h = 0; h < log_weight_.size(); ++h) {
    prob_[h] = std::exp(log_weight_[h] - top);
    total += prob_[h];
  }
  argmax_ = 0;
  for (std::size_t h = 0; h < prob_.size(); ++h) {
    prob_[h] /= total;
    if (prob_[h] > prob_[argmax_]) argmax_ = h;
  }
  // Keep the weights centered so long runs stay in range.
  for (auto& w : log_weight_) w -= top;
}

PosteriorState bayes_update(PosteriorState state, const Instance& inst, std::size_t a, double y) {
  state.update(inst, a, y);
  return state;
}

TrialEnvironment::TrialEnvironment(const Instance& inst, std::size_t true_h, RandomStream outcomes,
                                   std::size_t selection_cap)
    : inst_(&inst), true_h_(true_h), rng_(outcomes), cap_(selection_cap) {}

double TrialEnvironment::observe(std::size_t a) {
  cost_ += inst_->cost(a);
  ++steps_;
  return sample_outcome(inst_->family(), inst_->mean(true_h_, a), rng_);
}

double ScriptedSource::observe(std::size_t a) {
  if (next_ >= outcomes_.size()) throw NumericalError("outcome script exhausted");
  actions_.push_back(a);
  return outcomes_[next_++];
}

}  // namespace asht
