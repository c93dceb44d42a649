#include "asht/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asht/error.hpp"

namespace asht {

namespace {

struct Tableau {
  std::size_t rows = 0;
  std::size_t cols = 0;  // without the rhs column
  std::vector<double> a;  // rows x (cols + 1)
  std::vector<double> obj;  // reduced costs, cols + 1 (last is -value)
  std::vector<std::size_t> basis;

  double& at(std::size_t i, std::size_t j) { return a[i * (cols + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * (cols + 1) + j]; }
  double rhs(std::size_t i) const { return at(i, cols); }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= cols; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    const double f = obj[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= cols; ++j) obj[j] -= f * at(r, j);
      obj[c] = 0.0;
    }
    basis[r] = c;
  }

  // Sets obj to c_B B^-1 A - c for a maximization cost vector.
  void price(const std::vector<double>& cost) {
    for (std::size_t j = 0; j <= cols; ++j) obj[j] = j < cols ? -cost[j] : 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) obj[j] += cb * at(i, j);
    }
  }
};

enum class Phase { Optimal, Unbounded, Limit };

// Smallest accepted pivot element.
constexpr double kPivotTolerance = 1e-9;
constexpr std::size_t kDegenerateRun = 50;

Phase iterate(Tableau& t, const std::vector<char>& allowed, PivotRule rule, double eps,
              std::size_t& pivots, std::size_t max_pivots) {
  std::size_t degenerate = 0;
  while (true) {
    const bool bland = rule == PivotRule::Bland || degenerate >= kDegenerateRun;
    std::size_t enter = t.cols;
    double most = -eps;
    for (std::size_t j = 0; j < t.cols; ++j) {
      if (!allowed[j] || !(t.obj[j] < most)) continue;
      enter = j;
      if (bland) break;
      most = t.obj[j];
    }
    if (enter == t.cols) return Phase::Optimal;
    if (pivots >= max_pivots) return Phase::Limit;

    std::size_t leave = t.rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows; ++i) {
      const double v = t.at(i, enter);
      if (v <= kPivotTolerance) continue;
      const double ratio = t.rhs(i) / v;
      if (ratio < best - eps ||
          (std::abs(ratio - best) <= eps && t.basis[i] < t.basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == t.rows) return Phase::Unbounded;
    degenerate = best <= eps ? degenerate + 1 : 0;
    t.pivot(leave, enter);
    ++pivots;
  }
}

// Recomputes the basic variables from the original rows, B x_B = b, by
// Gaussian elimination with partial pivoting. Long pivot sequences lose
// accuracy in the tableau; the basis itself is still right. Leaves `basic`
// untouched if B is numerically singular.
void refine_basic_solution(const std::vector<double>& original, std::size_t cols,
                           const std::vector<std::size_t>& basis, std::vector<double>& basic) {
  const std::size_t m = basis.size();
  const std::size_t w = m + 1;
  std::vector<double> b(m * w);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) b[i * w + k] = original[i * (cols + 1) + basis[k]];
    b[i * w + m] = original[i * (cols + 1) + cols];
  }
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < m; ++i) {
      if (std::abs(b[i * w + k]) > std::abs(b[piv * w + k])) piv = i;
    }
    if (std::abs(b[piv * w + k]) < 1e-13) return;
    if (piv != k) {
      for (std::size_t j = 0; j < w; ++j) std::swap(b[k * w + j], b[piv * w + j]);
    }
    for (std::size_t i = k + 1; i < m; ++i) {
      const double f = b[i * w + k] / b[k * w + k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < w; ++j) b[i * w + j] -= f * b[k * w + j];
    }
  }
  std::vector<double> z(m);
  for (std::size_t k = m; k-- > 0;) {
    double v = b[k * w + m];
    for (std::size_t j = k + 1; j < m; ++j) v -= b[k * w + j] * z[j];
    z[k] = v / b[k * w + k];
  }
  for (std::size_t k = 0; k < m; ++k) basic[k] = std::max(0.0, z[k]);
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, PivotRule rule, double eps,
                     std::size_t max_pivots) {
  const std::size_t n = lp.objective.size();
  const std::size_t m = lp.constraints.size();
  for (const auto& c : lp.constraints) {
    if (c.coeffs.size() != n) throw ValidationError("constraint width does not match objective");
  }

  // Normalize to nonnegative right-hand sides.
  std::vector<double> sign(m, 1.0);
  std::vector<Relation> rel(m);
  std::size_t n_slack = 0, n_art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    rel[i] = lp.constraints[i].rel;
    if (lp.constraints[i].rhs < 0) {
      sign[i] = -1.0;
      if (rel[i] == Relation::LessEqual) rel[i] = Relation::GreaterEqual;
      else if (rel[i] == Relation::GreaterEqual) rel[i] = Relation::LessEqual;
    }
    if (rel[i] != Relation::Equal) ++n_slack;
    if (rel[i] != Relation::LessEqual) ++n_art;
  }

  Tableau t;
  t.rows = m;
  t.cols = n + n_slack + n_art;
  t.a.assign(m * (t.cols + 1), 0.0);
  t.obj.assign(t.cols + 1, 0.0);
  t.basis.assign(m, 0);

  // +1 column whose reduced cost carries each row's dual.
  std::vector<std::size_t> dual_col(m);
  std::vector<char> is_art(t.cols, 0);
  std::size_t next_slack = n, next_art = n + n_slack;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = lp.constraints[i];
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign[i] * c.coeffs[j];
    t.at(i, t.cols) = sign[i] * c.rhs;
    if (rel[i] == Relation::LessEqual) {
      t.at(i, next_slack) = 1.0;
      t.basis[i] = next_slack;
      dual_col[i] = next_slack++;
    } else {
      if (rel[i] == Relation::GreaterEqual) t.at(i, next_slack++) = -1.0;
      t.at(i, next_art) = 1.0;
      is_art[next_art] = 1;
      t.basis[i] = next_art;
      dual_col[i] = next_art++;
    }
  }

  const std::vector<double> original = t.a;

  LpSolution sol;
  std::size_t pivots = 0;

  if (n_art > 0) {
    std::vector<double> cost1(t.cols, 0.0);
    for (std::size_t j = 0; j < t.cols; ++j) {
      if (is_art[j]) cost1[j] = -1.0;
    }
    t.price(cost1);
    std::vector<char> allowed(t.cols, 1);
    const Phase p = iterate(t, allowed, rule, eps, pivots, max_pivots);
    sol.pivots = pivots;
    if (p == Phase::Limit) {
      sol.status = LpStatus::IterationLimit;
      return sol;
    }
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (is_art[t.basis[i]]) infeas += t.rhs(i);
    }
    if (infeas > std::sqrt(eps)) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_art[t.basis[i]]) continue;
      for (std::size_t j = 0; j < t.cols; ++j) {
        if (!is_art[j] && std::abs(t.at(i, j)) > eps) {
          t.pivot(i, j);
          ++pivots;
          break;
        }
      }
    }
  }

  std::vector<double> cost2(t.cols, 0.0);
  const double dir = lp.maximize ? 1.0 : -1.0;
  for (std::size_t j = 0; j < n; ++j) cost2[j] = dir * lp.objective[j];
  t.price(cost2);
  std::vector<char> allowed(t.cols, 1);
  for (std::size_t j = 0; j < t.cols; ++j) {
    if (is_art[j]) allowed[j] = 0;
  }
  const Phase p = iterate(t, allowed, rule, eps, pivots, max_pivots);
  sol.pivots = pivots;
  if (p == Phase::Limit) {
    sol.status = LpStatus::IterationLimit;
    return sol;
  }
  if (p == Phase::Unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  sol.status = LpStatus::Optimal;
  std::vector<double> basic(m);
  for (std::size_t i = 0; i < m; ++i) basic[i] = t.rhs(i);
  refine_basic_solution(original, t.cols, t.basis, basic);
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] < n) sol.x[t.basis[i]] = basic[i];
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];
  sol.duals.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    sol.duals[i] = dir * sign[i] * t.obj[dual_col[i]];
  }
  return sol;
}

}  // namespace asht
