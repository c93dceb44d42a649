#include "asht/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "asht/error.hpp"
#include "asht/ranking.hpp"
#include "asht/simplex.hpp"

namespace asht {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> prefix_sums(const std::vector<double>& d) {
  std::vector<double> p(d.size() + 1, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) p[i + 1] = p[i] + d[i];
  return p;
}

void check_lp(const LpInstance& lp) {
  if (lp.d.empty()) throw ValidationError("LP needs N >= 1");
  if (lp.t > lp.d.size()) throw ValidationError("LP needs t <= N");
  for (double v : lp.d) {
    if (!(v > 0.0)) throw ValidationError("LP weights must be positive");
  }
}

}  // namespace

double lp_closed_form(const LpInstance& lp) {
  check_lp(lp);
  const std::size_t n = lp.d.size();
  if (lp.t == 0) return 1.0;
  if (lp.t == n) return static_cast<double>(n);
  const auto p = prefix_sums(lp.d);
  double best = kInf;
  for (std::size_t i = 1; i <= lp.t; ++i) {
    for (std::size_t j = lp.t + 1; j <= n; ++j) {
      const double v = static_cast<double>(i) +
                       static_cast<double>(j - i) * (p[lp.t] - p[i]) / (p[j] - p[i]);
      best = std::min(best, v);
    }
  }
  return best;
}

double lp_simplex(const LpInstance& lp) {
  check_lp(lp);
  const std::size_t n = lp.d.size();
  const auto p = prefix_sums(lp.d);
  LinearProgram prog;
  prog.maximize = false;
  prog.objective.resize(n);
  LinearConstraint reach, simplex;
  reach.coeffs.resize(n);
  simplex.coeffs.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    prog.objective[i] = static_cast<double>(i + 1);
    reach.coeffs[i] = p[i + 1];
  }
  reach.rel = Relation::GreaterEqual;
  reach.rhs = p[lp.t];
  simplex.rel = Relation::Equal;
  simplex.rhs = 1.0;
  prog.constraints = {reach, simplex};
  const LpSolution sol = solve_lp(prog);
  if (sol.status != LpStatus::Optimal) throw NumericalError("LP(d,t) simplex failed");
  return sol.objective;
}

bool lp_lower_bound_check(const LpInstance& lp) {
  const double dmin = *std::min_element(lp.d.begin(), lp.d.end());
  return lp_closed_form(lp) >= static_cast<double>(lp.t) * dmin;
}

SfrOptimum brute_force_sfr(const Instance& inst, double saturation, std::size_t multiplicity,
                           std::size_t max_ground) {
  const std::size_t num_a = inst.num_actions();
  const std::size_t ground = num_a * multiplicity;
  if (ground > max_ground) throw SizeGuardError("SFR brute force ground set too large");
  const std::size_t num_h = inst.num_hypotheses();

  std::vector<std::size_t> perm;
  for (std::size_t a = 0; a < num_a; ++a) perm.insert(perm.end(), multiplicity, a);

  std::vector<CoverFunction> fs;
  for (std::size_t h = 0; h < num_h; ++h) fs.emplace_back(inst, h, saturation);

  SfrOptimum best;
  best.weighted_cover_time = kInf;
  do {
    double total = 0.0;
    for (std::size_t h = 0; h < num_h && total < kInf; ++h) {
      const auto ct = cover_time(fs[h], perm);
      total += ct ? inst.prior(h) * static_cast<double>(*ct) : kInf;
    }
    if (best.sequence.empty() || total < best.weighted_cover_time) {
      best.weighted_cover_time = total;
      best.sequence = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double brute_force_odt_subset(const Instance& inst, std::uint64_t subset, std::size_t max_h) {
  const std::size_t num_h = inst.num_hypotheses();
  if (num_h > max_h || num_h > 20) throw SizeGuardError("ODT DP hypothesis set too large");
  std::vector<double> memo(std::size_t{1} << num_h, -1.0);

  std::function<double(std::uint64_t)> solve = [&](std::uint64_t s) -> double {
    if (std::popcount(s) <= 1) return 0.0;
    if (memo[s] >= 0.0) return memo[s];
    double mass = 0.0;
    for (std::size_t h = 0; h < num_h; ++h) {
      if (s >> h & 1u) mass += inst.prior(h);
    }
    double best = kInf;
    for (std::size_t a = 0; a < inst.num_actions(); ++a) {
      std::map<double, std::uint64_t> parts;
      for (std::size_t h = 0; h < num_h; ++h) {
        if (s >> h & 1u) parts[inst.mean(h, a)] |= std::uint64_t{1} << h;
      }
      if (parts.size() < 2) continue;
      double v = inst.cost(a);
      for (const auto& [omega, part] : parts) {
        double pm = 0.0;
        for (std::size_t h = 0; h < num_h; ++h) {
          if (part >> h & 1u) pm += inst.prior(h);
        }
        if (mass > 0.0) v += pm / mass * solve(part);
      }
      best = std::min(best, v);
    }
    if (best == kInf) throw ValidationError("a hypothesis subset cannot be split by any test");
    memo[s] = best;
    return best;
  };
  return solve(subset);
}

double brute_force_odt(const Instance& inst, std::size_t max_h) {
  const std::size_t num_h = inst.num_hypotheses();
  if (num_h > max_h || num_h > 20) throw SizeGuardError("ODT DP hypothesis set too large");
  return brute_force_odt_subset(inst, (std::uint64_t{1} << num_h) - 1, max_h);
}

ExactPlanCost exact_policy_cost(const Instance& inst, const RnBPlan& plan,
                                std::size_t max_length) {
  if (inst.family().kind != FamilyKind::Bernoulli) {
    throw ValidationError("exact enumeration needs a Bernoulli instance");
  }
  if (plan.boosted.size() > max_length) throw SizeGuardError("plan too long to enumerate");
  const std::size_t num_h = inst.num_hypotheses();
  const double threshold = 0.5 * static_cast<double>(plan.boost) * plan.saturation;
  ExactPlanCost out;
  out.expected_cost.assign(num_h, 0.0);
  out.cost_variance.assign(num_h, 0.0);
  out.error.assign(num_h, 0.0);
  out.mass.assign(num_h, 0.0);

  // Scan order: by timestamp, then index.
  std::vector<std::size_t> order;
  for (std::size_t h = 0; h < num_h; ++h) {
    if (plan.timestamps[h]) order.push_back(h);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return *plan.timestamps[x] < *plan.timestamps[y];
  });

  std::vector<double> loglik(num_h, 0.0);
  std::vector<double> prob(num_h, 1.0);

  auto leaf = [&](std::size_t output, double cost) {
    for (std::size_t h = 0; h < num_h; ++h) {
      out.mass[h] += prob[h];
      out.expected_cost[h] += prob[h] * cost;
      out.cost_variance[h] += prob[h] * cost * cost;
      if (output != h) out.error[h] += prob[h];
    }
  };
  auto beats = [&](std::size_t h, std::size_t g) {
    if (loglik[h] == -kInf) return false;
    if (loglik[g] == -kInf) return true;
    return loglik[h] - loglik[g] >= threshold;
  };

  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t t, std::size_t next,
                                                                   double cost) {
    while (next < order.size() && *plan.timestamps[order[next]] == t) {
      const std::size_t h = order[next++];
      bool ok = true;
      for (std::size_t g = 0; g < num_h && ok; ++g) ok = g == h || beats(h, g);
      if (ok) {
        leaf(h, cost);
        return;
      }
    }
    if (next == order.size() || t == plan.boosted.size()) {
      std::size_t best = 0;
      double best_v = -kInf;
      for (std::size_t h = 0; h < num_h; ++h) {
        const double v = std::log(inst.prior(h)) + loglik[h];
        if (v > best_v) {
          best_v = v;
          best = h;
        }
      }
      leaf(best, cost);
      return;
    }
    const std::size_t a = plan.boosted[t];
    const auto saved_ll = loglik;
    const auto saved_p = prob;
    for (int y = 0; y <= 1; ++y) {
      for (std::size_t h = 0; h < num_h; ++h) {
        const double mu = inst.mean(h, a);
        prob[h] = saved_p[h] * (y == 1 ? mu : 1.0 - mu);
        loglik[h] = saved_ll[h] + log_likelihood(inst.family(), mu, y);
      }
      walk(t + 1, next, cost + inst.cost(a));
    }
    loglik = saved_ll;
    prob = saved_p;
  };
  walk(0, 0, 0.0);

  for (std::size_t h = 0; h < num_h; ++h) {
    if (out.mass[h] > 0.0) {
      out.expected_cost[h] /= out.mass[h];
      out.cost_variance[h] = std::max(
          0.0, out.cost_variance[h] / out.mass[h] - out.expected_cost[h] * out.expected_cost[h]);
      out.error[h] /= out.mass[h];
    }
  }
  return out;
}

namespace {

// Solves the square system in place; false when singular.
bool gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-12) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

}  // namespace

double max_min_by_vertices(const std::vector<std::vector<double>>& rows) {
  const std::size_t num_p = rows.size();
  const std::size_t num_a = rows.front().size();
  // Variables (lambda_0..lambda_{A-1}, v). Inequalities: rows lambda - v >= 0
  // and lambda_a >= 0; one equality 1^T lambda = 1. A vertex makes A of the
  // inequalities tight.
  const std::size_t num_ineq = num_p + num_a;
  if (num_ineq > 24) throw SizeGuardError("vertex enumeration too large");
  auto ineq_row = [&](std::size_t k) {
    std::vector<double> r(num_a + 1, 0.0);
    if (k < num_p) {
      for (std::size_t a = 0; a < num_a; ++a) r[a] = rows[k][a];
      r[num_a] = -1.0;
    } else {
      r[k - num_p] = 1.0;
    }
    return r;
  };

  double best = -kInf;
  std::vector<std::size_t> pick(num_a);
  std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t depth, std::size_t from) {
    if (depth == num_a) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (auto k : pick) {
        a.push_back(ineq_row(k));
        b.push_back(0.0);
      }
      std::vector<double> eq(num_a + 1, 1.0);
      eq[num_a] = 0.0;
      a.push_back(eq);
      b.push_back(1.0);
      std::vector<double> x;
      if (!gauss_solve(a, b, x)) return;
      for (std::size_t k = 0; k < num_ineq; ++k) {
        const auto r = ineq_row(k);
        double v = 0.0;
        for (std::size_t i = 0; i <= num_a; ++i) v += r[i] * x[i];
        if (v < -1e-9) return;
      }
      best = std::max(best, x[num_a]);
      return;
    }
    for (std::size_t k = from; k < num_ineq; ++k) {
      pick[depth] = k;
      choose(depth + 1, k + 1);
    }
  };
  choose(0, 0);
  return best;
}

double max_min_by_simplex(const std::vector<std::vector<double>>& rows) {
  const std::size_t num_a = rows.front().size();
  LinearProgram lp;
  lp.maximize = true;
  lp.objective.assign(num_a + 1, 0.0);
  lp.objective[num_a] = 1.0;
  for (const auto& r : rows) {
    LinearConstraint c;
    c.coeffs.assign(r.begin(), r.end());
    c.coeffs.push_back(-1.0);
    c.rel = Relation::GreaterEqual;
    c.rhs = 0.0;
    lp.constraints.push_back(std::move(c));
  }
  LinearConstraint eq;
  eq.coeffs.assign(num_a + 1, 1.0);
  eq.coeffs[num_a] = 0.0;
  eq.rel = Relation::Equal;
  eq.rhs = 1.0;
  lp.constraints.push_back(std::move(eq));
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) throw NumericalError("max-min simplex failed");
  return sol.objective;
}

Instance one_vs_rest_instance(std::size_t n) {
  if (n < 2) throw ValidationError("one-vs-rest needs n >= 2");
  InstanceData d;
  for (std::size_t h = 0; h < n; ++h) d.hypotheses.push_back("h" + std::to_string(h));
  for (std::size_t a = 0; a + 1 < n; ++a) d.actions.push_back("a" + std::to_string(a));
  d.prior.assign(n, 1.0 / static_cast<double>(n));
  d.costs.assign(n - 1, 1.0);
  d.means.assign(n, std::vector<double>(n - 1, 0.1));
  for (std::size_t a = 0; a + 1 < n; ++a) d.means[a][a] = 0.9;
  return Instance::create(std::move(d));
}

}  // namespace asht
