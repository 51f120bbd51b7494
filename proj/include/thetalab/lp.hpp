#pragma once

#include <Eigen/Dense>

#include <limits>
#include <string>

namespace thetalab {

/// maximize objective·x  subject to  eq_rows x = eq_rhs,  ineq_rows x <= ineq_rhs,
/// x >= lower (entries may be -infinity for free variables).
struct LpProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_rows;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_rows;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;

  /// Empty problem over `variables` nonnegative variables.
  explicit LpProblem(Eigen::Index variables = 0);

  Eigen::Index variables() const { return objective.size(); }
  void add_eq(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs);
  void add_ineq(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs);
  void set_free(Eigen::Index j) { lower(j) = -std::numeric_limits<double>::infinity(); }

  /// Throws std::invalid_argument on mismatched sizes or non-finite data.
  void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

std::string to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Eigen::VectorXd primal;
  /// Multipliers for the equality rows (free sign) and the inequality rows
  /// (nonnegative), in the sign convention of the maximization.
  Eigen::VectorXd dual_eq;
  Eigen::VectorXd dual_ineq;
  /// Dual objective; equals `value` at an exact optimum.
  double dual_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity_residual = 0.0;
  int pivots = 0;
};

/// Two-phase dense simplex. Entering column by largest reduced cost (lowest
/// index on ties), leaving row by the lexicographic ratio rule, so degenerate
/// bases cannot cycle. The final basis is re-solved with a pivoted LU to
/// clean up accumulated round-off.
LpSolution lp_solve(const LpProblem& problem, double tol = 1e-9);

}  // namespace thetalab
