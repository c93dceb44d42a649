#include "asht/alive_set.hpp"

#include <algorithm>

namespace asht {

AliveSet::AliveSet(std::size_t universe, bool full)
    : universe_(universe), words_((universe + 63) / 64, 0) {
  if (full) {
    for (std::size_t h = 0; h < universe; ++h) insert(h);
  }
}

std::size_t AliveSet::size() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::size_t> AliveSet::members() const {
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < universe_; ++h) {
    if (contains(h)) out.push_back(h);
  }
  return out;
}

std::size_t AliveSet::intersection_size(const AliveSet& other) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    n += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
  }
  return n;
}

AliveSet AliveSet::intersect(const AliveSet& other) const {
  AliveSet out = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= other.words_[i];
  return out;
}

AliveSet posterior_alive_set(std::span<const double> posterior, double delta) {
  const std::size_t num_h = posterior.size();
  const double threshold = delta / static_cast<double>(num_h);
  AliveSet alive(num_h);
  for (std::size_t h = 0; h < num_h; ++h) {
    if (posterior[h] > threshold) alive.insert(h);
  }
  const std::size_t want = std::min<std::size_t>(2, num_h);
  if (alive.size() < want) {
    std::vector<std::size_t> order(num_h);
    for (std::size_t h = 0; h < num_h; ++h) order[h] = h;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return posterior[x] > posterior[y]; });
    for (auto h : order) {
      if (alive.size() >= want) break;
      alive.insert(h);
    }
  }
  return alive;
}

std::size_t AliveSetHash::operator()(const AliveSet& s) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ s.universe();
  for (auto w : s.words()) {
    h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace asht
