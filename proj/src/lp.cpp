#include "thetalab/lp.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace thetalab {

LpProblem::LpProblem(Eigen::Index variables)
    : objective(Eigen::VectorXd::Zero(variables)),
      eq_rows(0, variables),
      eq_rhs(0),
      ineq_rows(0, variables),
      ineq_rhs(0),
      lower(Eigen::VectorXd::Zero(variables)) {}

namespace {

void append_row(Eigen::MatrixXd& rows, Eigen::VectorXd& rhs,
                const Eigen::Ref<const Eigen::RowVectorXd>& row, double value) {
  if (row.size() != rows.cols()) throw std::invalid_argument("LP row has wrong length");
  rows.conservativeResize(rows.rows() + 1, Eigen::NoChange);
  rows.row(rows.rows() - 1) = row;
  rhs.conservativeResize(rhs.size() + 1);
  rhs(rhs.size() - 1) = value;
}

}  // namespace

void LpProblem::add_eq(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs) {
  append_row(eq_rows, eq_rhs, row, rhs);
}

void LpProblem::add_ineq(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs) {
  append_row(ineq_rows, ineq_rhs, row, rhs);
}

void LpProblem::validate() const {
  const auto n = variables();
  if (eq_rows.cols() != n || ineq_rows.cols() != n || lower.size() != n) {
    throw std::invalid_argument("LP dimensions disagree with variable count");
  }
  if (eq_rows.rows() != eq_rhs.size() || ineq_rows.rows() != ineq_rhs.size()) {
    throw std::invalid_argument("LP row count disagrees with rhs length");
  }
  const bool finite = objective.allFinite() && eq_rows.allFinite() && eq_rhs.allFinite() &&
                      ineq_rows.allFinite() && ineq_rhs.allFinite();
  if (!finite) throw std::invalid_argument("LP data must be finite");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isnan(lower(j)) || lower(j) == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("LP lower bound must be finite or -infinity");
    }
  }
}

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
  }
  return "unknown";
}

namespace {

// Standard form  min cost·z  s.t.  matrix z = rhs (rhs >= 0), z >= 0.
struct StandardForm {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  Eigen::VectorXd cost;
  std::vector<int> plus_col;   // per original variable
  std::vector<int> minus_col;  // -1 unless free
  std::vector<double> row_sign;
  Eigen::Index structural = 0;
};

StandardForm standardize(const LpProblem& p) {
  StandardForm sf;
  const Eigen::Index n = p.variables();
  const Eigen::Index m_eq = p.eq_rows.rows();
  const Eigen::Index m_ub = p.ineq_rows.rows();
  const Eigen::Index m = m_eq + m_ub;

  int cols = 0;
  sf.plus_col.resize(n);
  sf.minus_col.assign(n, -1);
  for (Eigen::Index j = 0; j < n; ++j) {
    sf.plus_col[j] = cols++;
    if (!std::isfinite(p.lower(j))) sf.minus_col[j] = cols++;
  }
  sf.structural = cols;
  const Eigen::Index total = cols + m_ub;

  Eigen::MatrixXd rows(m, n);
  rows << p.eq_rows, p.ineq_rows;
  Eigen::VectorXd rhs(m);
  rhs << p.eq_rhs, p.ineq_rhs;
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isfinite(p.lower(j))) shift(j) = p.lower(j);
  }
  rhs -= rows * shift;

  sf.matrix = Eigen::MatrixXd::Zero(m, total);
  sf.cost = Eigen::VectorXd::Zero(total);
  for (Eigen::Index j = 0; j < n; ++j) {
    sf.matrix.col(sf.plus_col[j]) = rows.col(j);
    sf.cost(sf.plus_col[j]) = -p.objective(j);
    if (sf.minus_col[j] >= 0) {
      sf.matrix.col(sf.minus_col[j]) = -rows.col(j);
      sf.cost(sf.minus_col[j]) = p.objective(j);
    }
  }
  for (Eigen::Index i = 0; i < m_ub; ++i) sf.matrix(m_eq + i, cols + i) = 1.0;

  sf.row_sign.assign(m, 1.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (rhs(i) < 0) {
      sf.row_sign[i] = -1.0;
      sf.matrix.row(i) *= -1.0;
      rhs(i) = -rhs(i);
    }
  }
  sf.rhs = rhs;
  return sf;
}

class Tableau {
 public:
  Tableau(const StandardForm& sf, double tol)
      : m_(sf.matrix.rows()), cols_(sf.matrix.cols()), tol_(tol) {
    t_ = Eigen::MatrixXd::Zero(m_ + 1, cols_ + m_ + 1);
    t_.topLeftCorner(m_, cols_) = sf.matrix;
    t_.block(0, cols_, m_, m_).setIdentity();
    t_.topRightCorner(m_, 1) = sf.rhs;
    basis_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) basis_[i] = static_cast<int>(cols_ + i);
    redundant_.assign(m_, false);
  }

  Eigen::Index rows() const { return m_; }
  const std::vector<int>& basis() const { return basis_; }
  int pivots() const { return pivots_; }
  bool is_artificial(int col) const { return col >= cols_; }
  double rhs(Eigen::Index i) const { return t_(i, cols_ + m_); }

  void set_cost(const Eigen::VectorXd& cost_with_artificials) {
    auto obj = t_.row(m_);
    obj.setZero();
    obj.head(cols_ + m_) = cost_with_artificials.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = cost_with_artificials(basis_[i]);
      if (cb != 0.0) obj -= cb * t_.row(i);
    }
  }

  // Returns false if the objective is unbounded below.
  bool optimize() {
    const int cap = 50 * static_cast<int>(m_ + cols_) + 1000;
    for (int iter = 0; iter < cap; ++iter) {
      const int q = entering();
      if (q < 0) return true;
      const int r = leaving(q);
      if (r < 0) return false;
      pivot(r, q);
    }
    throw std::runtime_error("simplex iteration cap reached");
  }

  // After phase one: pivot basic artificials out where possible; rows where
  // that fails are linearly dependent and stay pinned at zero.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      Eigen::Index best = -1;
      double best_abs = 1e-7;
      for (Eigen::Index j = 0; j < cols_; ++j) {
        const double a = std::abs(t_(i, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best >= 0) {
        pivot(static_cast<int>(i), static_cast<int>(best));
      } else {
        redundant_[i] = true;
      }
    }
  }

 private:
  // Artificial columns never (re-)enter the basis.
  int entering() const {
    int best = -1;
    double best_value = -tol_;
    for (Eigen::Index j = 0; j < cols_; ++j) {
      const double d = t_(m_, j);
      if (d < best_value) {
        best_value = d;
        best = static_cast<int>(j);
      }
    }
    return best;
  }

  int leaving(int q) const {
    constexpr double pivot_tol = 1e-9;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!redundant_[i] && t_(i, q) > pivot_tol) min_ratio = std::min(min_ratio, std::max(0.0, rhs(i)) / t_(i, q));
    }
    std::vector<int> ties;
    const double band = min_ratio + 1e-12 * (1.0 + std::abs(min_ratio));
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!redundant_[i] && t_(i, q) > pivot_tol && std::max(0.0, rhs(i)) / t_(i, q) <= band) {
        ties.push_back(static_cast<int>(i));
      }
    }
    if (ties.empty()) return -1;
    if (ties.size() == 1) return ties.front();
    // Lexicographic rule: compare rows of B^{-1} (the artificial block)
    // scaled by the pivot column entry.
    int best = ties.front();
    for (std::size_t k = 1; k < ties.size(); ++k) {
      const int cand = ties[k];
      for (Eigen::Index c = cols_; c < cols_ + m_; ++c) {
        const double a = t_(cand, c) / t_(cand, q);
        const double b = t_(best, c) / t_(best, q);
        if (a < b - 1e-12) {
          best = cand;
          break;
        }
        if (a > b + 1e-12) break;
      }
    }
    return best;
  }

  void pivot(int r, int q) {
    t_.row(r) /= t_(r, q);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, q);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = q;
    ++pivots_;
  }

  Eigen::Index m_;
  Eigen::Index cols_;
  double tol_;
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  std::vector<bool> redundant_;
  int pivots_ = 0;
};

void fill_residuals(const LpProblem& p, LpSolution& s) {
  const Eigen::VectorXd& x = s.primal;
  double primal = 0.0;
  if (p.eq_rows.rows() > 0) primal = (p.eq_rows * x - p.eq_rhs).cwiseAbs().maxCoeff();
  Eigen::VectorXd slack = p.ineq_rhs;
  if (p.ineq_rows.rows() > 0) {
    slack -= p.ineq_rows * x;
    primal = std::max(primal, (-slack).cwiseMax(0.0).maxCoeff());
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::isfinite(p.lower(j))) primal = std::max(primal, p.lower(j) - x(j));
  }

  Eigen::VectorXd reduced = p.objective;
  reduced -= p.eq_rows.transpose() * s.dual_eq;
  reduced -= p.ineq_rows.transpose() * s.dual_ineq;

  double dual = 0.0;
  double comp = 0.0;
  double dual_value = p.eq_rhs.dot(s.dual_eq) + p.ineq_rhs.dot(s.dual_ineq);
  for (Eigen::Index i = 0; i < s.dual_ineq.size(); ++i) {
    dual = std::max(dual, -s.dual_ineq(i));
    comp = std::max(comp, std::abs(s.dual_ineq(i) * slack(i)));
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::isfinite(p.lower(j))) {
      dual = std::max(dual, reduced(j));
      comp = std::max(comp, std::abs(reduced(j) * (x(j) - p.lower(j))));
      dual_value += p.lower(j) * reduced(j);
    } else {
      dual = std::max(dual, std::abs(reduced(j)));
    }
  }
  s.primal_residual = std::max(primal, 0.0);
  s.dual_residual = dual;
  s.complementarity_residual = comp;
  s.dual_value = dual_value;
}

}  // namespace

LpSolution lp_solve(const LpProblem& problem, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("LP tolerance must be positive");
  problem.validate();
  const StandardForm sf = standardize(problem);
  const Eigen::Index m = sf.matrix.rows();
  const Eigen::Index cols = sf.matrix.cols();

  LpSolution out;
  out.primal = Eigen::VectorXd::Zero(problem.variables());
  out.dual_eq = Eigen::VectorXd::Zero(problem.eq_rows.rows());
  out.dual_ineq = Eigen::VectorXd::Zero(problem.ineq_rows.rows());

  Tableau tab(sf, tol);

  // Phase one: minimise the sum of artificials.
  Eigen::VectorXd phase_one = Eigen::VectorXd::Zero(cols + m);
  phase_one.tail(m).setOnes();
  tab.set_cost(phase_one);
  tab.optimize();
  double infeasibility = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.is_artificial(tab.basis()[i])) infeasibility += std::max(0.0, tab.rhs(i));
  }
  const double scale = 1.0 + (m > 0 ? sf.rhs.cwiseAbs().maxCoeff() : 0.0);
  if (infeasibility > 1e-7 * scale) {
    out.status = LpStatus::infeasible;
    out.pivots = tab.pivots();
    return out;
  }
  tab.expel_artificials();

  // Phase two.
  Eigen::VectorXd phase_two = Eigen::VectorXd::Zero(cols + m);
  phase_two.head(cols) = sf.cost;
  tab.set_cost(phase_two);
  if (!tab.optimize()) {
    out.status = LpStatus::unbounded;
    out.pivots = tab.pivots();
    return out;
  }

  // Re-solve the optimal basis directly for clean primal and dual values.
  Eigen::MatrixXd full(m, cols + m);
  full << sf.matrix, Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd basis_matrix(m, m);
  Eigen::VectorXd basis_cost(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    basis_matrix.col(i) = full.col(tab.basis()[i]);
    basis_cost(i) = phase_two(tab.basis()[i]);
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(cols + m);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  if (m > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_matrix);
    const Eigen::VectorXd xb = lu.solve(sf.rhs);
    y = lu.transpose().solve(basis_cost);
    for (Eigen::Index i = 0; i < m; ++i) z(tab.basis()[i]) = std::max(0.0, xb(i));
  }

  for (Eigen::Index j = 0; j < problem.variables(); ++j) {
    double v = z(sf.plus_col[j]);
    if (sf.minus_col[j] >= 0) {
      v -= z(sf.minus_col[j]);
    } else {
      v += problem.lower(j);
    }
    out.primal(j) = v;
  }
  const Eigen::Index m_eq = problem.eq_rows.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = -sf.row_sign[i] * y(i);
    if (i < m_eq) {
      out.dual_eq(i) = u;
    } else {
      out.dual_ineq(i - m_eq) = u;
    }
  }
  out.status = LpStatus::optimal;
  out.value = problem.objective.dot(out.primal);
  out.pivots = tab.pivots();
  fill_residuals(problem, out);
  return out;
}

}  // namespace thetalab
