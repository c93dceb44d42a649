#pragma once

#include <cstddef>
#include <vector>

namespace asht {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct LinearConstraint {
  std::vector<double> coeffs;
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
};

/// optimize c^T x subject to the constraints and x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  bool maximize = true;
  std::vector<LinearConstraint> constraints;
};

enum class PivotRule {
  /// Lowest-index entering and leaving variables; never cycles.
  Bland,
  /// Most negative reduced cost; falls back to Bland after a run of
  /// degenerate pivots.
  Dantzig,
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  /// Shadow price of each constraint, in the sense of the original problem.
  std::vector<double> duals;
  std::size_t pivots = 0;
};

/// Dense two-phase tableau simplex.
LpSolution solve_lp(const LinearProgram& lp, PivotRule rule = PivotRule::Bland,
                    double eps = 1e-11, std::size_t max_pivots = 1'000'000);

}  // namespace asht
