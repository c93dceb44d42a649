#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace asht {

enum class FamilyKind { Bernoulli, UnitGaussian };

/// Distribution family D_theta producing the outcome of an action.
/// Bernoulli parameters are success probabilities; UnitGaussian parameters are
/// means of a variance-one normal.
struct OutcomeFamily {
  FamilyKind kind = FamilyKind::Bernoulli;
  /// Optional [lo, hi] declared for Bernoulli tables.
  std::optional<std::pair<double, double>> range;

  static OutcomeFamily bernoulli() { return {}; }
  static OutcomeFamily unit_gaussian() { return {FamilyKind::UnitGaussian, std::nullopt}; }

  bool valid_parameter(double theta) const;
  std::string name() const;
};

/// KL divergence in nats. Bernoulli divergences against a boundary parameter
/// are infinite; they are reported through `unbounded` instead of an inf.
struct Divergence {
  double nats = 0.0;
  bool unbounded = false;

  /// The divergence as a double, +inf when unbounded.
  double value() const;
};

Divergence kl_divergence(const OutcomeFamily& family, double theta1, double theta2);

/// Log density of outcome y under parameter theta, up to a term that does not
/// depend on theta (the Gaussian normalizer is dropped). May be -inf for
/// Bernoulli boundary parameters.
double log_likelihood(const OutcomeFamily& family, double theta, double y);

/// Raw instance fields, as read from or written to disk.
struct InstanceData {
  OutcomeFamily family;
  std::vector<std::string> hypotheses;
  std::vector<std::string> actions;
  std::vector<double> prior;
  std::vector<double> costs;
  /// means[h][a]
  std::vector<std::vector<double>> means;
};

/// An immutable, validated ASHT instance with its pairwise divergence cache.
///
/// Every pair of distinct hypotheses differs on at least one action, the
/// prior is a probability vector and every mean is valid for the family.
/// Instances are shared read-only between concurrent trials.
class Instance {
 public:
  /// Validates `data` and computes the divergence cache. Throws
  /// ValidationError on malformed fields and ValidityError naming the first
  /// indistinguishable pair.
  static Instance create(InstanceData data);

  std::size_t num_hypotheses() const { return num_h_; }
  std::size_t num_actions() const { return num_a_; }

  const OutcomeFamily& family() const { return data_.family; }
  const std::vector<std::string>& hypotheses() const { return data_.hypotheses; }
  const std::vector<std::string>& actions() const { return data_.actions; }
  std::span<const double> prior() const { return data_.prior; }
  std::span<const double> costs() const { return data_.costs; }
  double prior(std::size_t h) const { return data_.prior[h]; }
  double cost(std::size_t a) const { return data_.costs[a]; }
  double mean(std::size_t h, std::size_t a) const { return means_[h * num_a_ + a]; }
  bool uniform_costs() const;

  /// d(g,h;a) = KL(D_mu(g,a) || D_mu(h,a)); +inf when unbounded.
  double divergence(std::size_t g, std::size_t h, std::size_t a) const {
    return divergence_[(g * num_h_ + h) * num_a_ + a];
  }
  /// Contiguous d(g,h;.) over all actions.
  std::span<const double> divergences(std::size_t g, std::size_t h) const {
    return {divergence_.data() + (g * num_h_ + h) * num_a_, num_a_};
  }
  /// Whole cache, indexed [(g*|H| + h)*|A| + a].
  std::span<const double> divergence_cache() const { return divergence_; }
  bool has_unbounded_divergence() const { return has_unbounded_; }

  const InstanceData& data() const { return data_; }

 private:
  Instance() = default;

  InstanceData data_;
  std::size_t num_h_ = 0;
  std::size_t num_a_ = 0;
  std::vector<double> means_;
  std::vector<double> divergence_;
  bool has_unbounded_ = false;
};

/// Separation parameters of an instance.
struct SeparationReport {
  /// Minimum strictly positive d(g,h;a); +inf when |H| = 1.
  double s = 0.0;
  /// s(a): minimum strictly positive d(g,h;a) for fixed a; +inf when the
  /// action separates no pair.
  std::vector<double> per_action;
  /// View of the instance's cache, indexed [(g*|H| + h)*|A| + a]. Valid while
  /// the instance lives.
  std::span<const double> pair_divergences;
};

SeparationReport separation(const Instance& inst);

/// Throws ValidityError naming the first pair (g < h) with identical means on
/// every action.
void check_validity(const InstanceData& data);

struct SyntheticMode {
  enum class Kind { Uniform01, Grid };
  Kind kind = Kind::Uniform01;
  /// Grid resolution k: values {1/k, ..., (k-1)/k}.
  int grid_k = 8;

  static SyntheticMode uniform01() { return {}; }
  static SyntheticMode grid(int k) { return {Kind::Grid, k}; }
};

/// Lower/upper clamp for uniform01 draws, keeping every Bernoulli KL finite.
inline constexpr double kUniformLow = 0.01;
inline constexpr double kUniformHigh = 0.99;
inline constexpr int kValidityRetries = 100;

/// Random Bernoulli instance with uniform prior and unit costs. Pure function
/// of its arguments.
Instance generate_synthetic(std::size_t num_h, std::size_t num_a, SyntheticMode mode,
                            std::uint64_t seed);

inline constexpr double kMutationFloor = 1e-10;

/// Reads a mutation-probability CSV: a header row naming the hypotheses after
/// a leading action-id column, then one row per action. Zero cells become
/// `floor` and exact duplicate rows are dropped (first kept).
Instance load_mutation_table(const std::filesystem::path& path, double floor = kMutationFloor);
Instance parse_mutation_table(const std::string& text, double floor = kMutationFloor);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

/// Loads an instance JSON document, or a mutation table when the file ends in
/// ".csv".
Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& inst, const std::filesystem::path& path);

}  // namespace asht
