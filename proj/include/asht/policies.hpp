#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asht/instance.hpp"
#include "asht/simulation.hpp"

namespace asht {

/// A policy selection with its parameters, as written in experiment configs.
///
/// Kinds: rnb (theory Rank-and-Boost), rnb-exp (eta-truncated greedy with
/// posterior stopping), fa (theory greedy ODT), fa-exp (FA(k_max, delta)),
/// random, nj (two-phase NJ) and nj-pa (phase 1 only).
struct PolicySpec {
  std::string kind;
  /// Identifier in outputs; the kind when empty.
  std::string label;

  // rnb / rnb-exp. rnb defaults B to ln(1/delta)/2, rnb-exp to ln(|H|/delta).
  std::optional<double> saturation;
  std::optional<std::size_t> boost;
  std::optional<std::size_t> multiplicity;
  std::size_t eta = 800;
  /// "timestamps" or "posterior"; rnb defaults to timestamps, rnb-exp to
  /// posterior.
  std::optional<std::string> stop;

  // fa-exp
  std::size_t k_max = 5;
  double C = 0.5;

  // nj / nj-pa
  double r = 0.1;
  double kl_cap = 50.0;
  /// Restrict NJ pairs to the posterior alive set. Defaults to true for nj and
  /// false for nj-pa, whose phase-1 distribution must not depend on outcomes.
  std::optional<bool> alive_pairs;

  std::string id() const { return label.empty() ? kind : label; }

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

const std::vector<std::string>& policy_kinds();

/// Throws ValidationError on an unknown kind or bad parameters.
void validate_policy_spec(const PolicySpec& spec);

PolicySpec policy_spec_from_json(const nlohmann::json& j);
nlohmann::json policy_spec_to_json(const PolicySpec& spec);

/// Builds the policy for one instance and error target; plans are computed
/// here, once.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Instance& inst, double delta);

}  // namespace asht
