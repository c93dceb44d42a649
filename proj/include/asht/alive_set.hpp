#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace asht {

/// A subset of hypothesis indices, stored as a bitset. Used for alive sets and
/// elimination sets.
class AliveSet {
 public:
  AliveSet() = default;
  explicit AliveSet(std::size_t universe, bool full = false);
  static AliveSet all(std::size_t universe) { return AliveSet(universe, true); }

  std::size_t universe() const { return universe_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool contains(std::size_t h) const { return (words_[h / 64] >> (h % 64)) & 1u; }
  void insert(std::size_t h) { words_[h / 64] |= std::uint64_t{1} << (h % 64); }
  void erase(std::size_t h) { words_[h / 64] &= ~(std::uint64_t{1} << (h % 64)); }

  std::vector<std::size_t> members() const;
  /// |this ∩ other|
  std::size_t intersection_size(const AliveSet& other) const;
  AliveSet intersect(const AliveSet& other) const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const AliveSet&, const AliveSet&) = default;

 private:
  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

/// {h : posterior(h) > delta/|H|}, topped up with the most probable
/// hypotheses to at least two members when |H| >= 2.
AliveSet posterior_alive_set(std::span<const double> posterior, double delta);

struct AliveSetHash {
  std::size_t operator()(const AliveSet& s) const;
};

}  // namespace asht
