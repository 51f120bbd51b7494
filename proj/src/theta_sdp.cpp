#include "thetalab/theta.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace thetalab {

// Program: max <J, X>  s.t.  tr X = 1,  X_ij = 0 on edges,  X psd.
// Dual:    min y0      s.t.  y0 I + Y - J psd,  Y symmetric, supported on edges.
// Any edge-supported Y gives theta <= lambda_max(J - Y); any psd X with unit
// trace vanishing on edges gives theta >= sum(X).

namespace {

struct Bracket {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd witness;
  Eigen::MatrixXd certificate;

  double half_gap() const { return 0.5 * std::max(0.0, upper - lower); }
  double mid() const { return 0.5 * (upper + lower); }
};

struct Problem {
  int n = 0;
  std::vector<Edge> edges;
  Eigen::MatrixXi is_edge;
};

double top_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(m.rows() - 1);
}

// Zero the edge entries, shift the spectrum to be nonnegative, renormalise
// the trace. Returns sum(X) of the repaired matrix.
double repair_primal(const Eigen::MatrixXd& x, const Problem& p, Eigen::MatrixXd& out) {
  const int n = p.n;
  out = 0.5 * (x + x.transpose());
  for (const auto& [i, j] : p.edges) {
    out(i, j) = 0.0;
    out(j, i) = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out, Eigen::EigenvaluesOnly);
  const double lambda_min = es.eigenvalues()(0);
  if (lambda_min < 0) out.diagonal().array() -= lambda_min;
  const double trace = out.trace();
  if (!(trace > 0)) {
    out = Eigen::MatrixXd::Identity(n, n) / static_cast<double>(n);
    return 1.0;
  }
  out /= trace;
  return out.sum();
}

// y_edges holds the edge-supported dual matrix Y.
void certify(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y_edges, const Problem& p,
             Bracket& best) {
  Eigen::MatrixXd completed = Eigen::MatrixXd::Ones(p.n, p.n) - y_edges;
  const double upper = top_eigenvalue(completed);
  if (upper < best.upper) {
    best.upper = upper;
    best.certificate = std::move(completed);
  }
  Eigen::MatrixXd repaired;
  const double lower = repair_primal(x, p, repaired);
  if (lower > best.lower) {
    best.lower = lower;
    best.witness = std::move(repaired);
  }
}

bool tight_enough(const Bracket& b, double tol) {
  return b.half_gap() <= tol * std::max(1.0, b.mid());
}

// Largest step in [0, 1] keeping m + step * dm positive definite, damped.
double max_step(const Eigen::MatrixXd& m, const Eigen::MatrixXd& dm) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXd l_inv =
      llt.matrixL().solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  const Eigen::MatrixXd s_raw = l_inv * dm * l_inv.transpose();
  const Eigen::MatrixXd s = 0.5 * (s_raw + s_raw.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  const double lambda_min = es.eigenvalues()(0);
  if (lambda_min >= 0) return 1.0;
  return std::min(1.0, 0.95 * (-1.0 / lambda_min));
}

// Primal-dual path following with the HKM direction. The Schur complement
// has one row per constraint, so this runs only for moderate edge counts.
int solve_interior_point(const Problem& p, const SdpOptions& opt, Bracket& best) {
  const int n = p.n;
  const int m_edges = static_cast<int>(p.edges.size());
  const int m = m_edges + 1;  // row 0 is the trace

  auto edge_matrix = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int e = 0; e < m_edges; ++e) {
      const auto [i, j] = p.edges[e];
      out(i, j) = v(e + 1);
      out(j, i) = v(e + 1);
    }
    return out;
  };
  // A_0 = I, A_e = E_ij + E_ji.
  auto apply_a = [&](const Eigen::MatrixXd& mat) {
    Eigen::VectorXd out(m);
    out(0) = mat.trace();
    for (int e = 0; e < m_edges; ++e) {
      const auto [i, j] = p.edges[e];
      out(e + 1) = mat(i, j) + mat(j, i);
    }
    return out;
  };
  auto apply_at = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd out = edge_matrix(v);
    out.diagonal().array() += v(0);
    return out;
  };

  const Eigen::MatrixXd c = Eigen::MatrixXd::Ones(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(0) = 1.0;

  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(n, n) / static_cast<double>(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  y(0) = n + 1.0;
  Eigen::MatrixXd z = (n + 1.0) * Eigen::MatrixXd::Identity(n, n) - c;

  Eigen::MatrixXd schur(m, m);
  double centering = 0.5;
  int iter = 0;
  for (iter = 1; iter <= opt.interior_point_iterations; ++iter) {
    const double mu = centering * x.cwiseProduct(z).sum() / n;
    Eigen::LLT<Eigen::MatrixXd> z_llt(z);
    if (z_llt.info() != Eigen::Success) break;
    const Eigen::MatrixXd zi = z_llt.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd rd = apply_at(y) - c - z;

    // M_pq = <A_p, Zi A_q X>
    const Eigen::MatrixXd xzi = x * zi;
    schur(0, 0) = zi.cwiseProduct(x).sum();
    for (int q = 0; q < m_edges; ++q) {
      const auto [k, l] = p.edges[q];
      schur(0, q + 1) = xzi(l, k) + xzi(k, l);
      schur(q + 1, 0) = schur(0, q + 1);
      for (int r = q; r < m_edges; ++r) {
        const auto [i, j] = p.edges[r];
        const double v =
            zi(j, k) * x(l, i) + zi(j, l) * x(k, i) + zi(i, k) * x(l, j) + zi(i, l) * x(k, j);
        schur(r + 1, q + 1) = v;
        schur(q + 1, r + 1) = v;
      }
    }
    const Eigen::VectorXd rhs = mu * apply_a(zi) - b - apply_a(zi * rd * x);
    Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
    if (schur_llt.info() != Eigen::Success) break;  // numerically singular near the optimum
    const Eigen::VectorXd dy = schur_llt.solve(rhs);
    const Eigen::MatrixXd dz = apply_at(dy) + rd;
    const Eigen::MatrixXd dx_raw = mu * zi - x - zi * dz * x;
    const Eigen::MatrixXd dx = 0.5 * (dx_raw + dx_raw.transpose());

    const double alpha_p = max_step(x, dx);
    const double alpha_d = max_step(z, dz);
    if (alpha_p < 1e-12 && alpha_d < 1e-12) break;
    x += alpha_p * dx;
    y += alpha_d * dy;
    z += alpha_d * dz;
    centering = (alpha_p > 0.8 && alpha_d > 0.8) ? 0.1 : 0.5;

    const double gap = std::abs(y(0) - x.sum());
    if (gap <= 0.5 * opt.tol * std::max(1.0, std::abs(y(0)))) {
      certify(x, edge_matrix(y), p, best);
      if (tight_enough(best, opt.tol)) break;
    }
  }
  certify(x, edge_matrix(y), p, best);
  return std::min(iter, opt.interior_point_iterations);
}

// Augmented Lagrangian on the dual (boundary point method) with occasional
// residual balancing of the penalty. One eigendecomposition per iteration.
int solve_boundary_point(const Problem& p, const SdpOptions& opt, Bracket& best) {
  const int n = p.n;
  const Eigen::MatrixXi& edge = p.is_edge;
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(n, n) / static_cast<double>(n);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd y_edges = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd w(n, n);
  double sigma = 1.0 / n;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  int iter = 0;
  for (iter = 1; iter <= opt.max_iterations; ++iter) {
    // closed-form y-step: the constraint Gram matrix is diagonal
    const double y0 = (n + z.trace() + (x.trace() - 1.0) / sigma) / n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        y_edges(i, j) = edge(i, j) ? 1.0 + z(i, j) + x(i, j) / sigma : 0.0;
      }
    }
    // W = A^T y - C - X / sigma
    w = -Eigen::MatrixXd::Ones(n, n) - x / sigma;
    w.diagonal().array() += y0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (edge(i, j)) w(i, j) = z(i, j);
      }
    }
    es.compute(w);
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    z.noalias() = vecs * vals.cwiseMax(0.0).asDiagonal() * vecs.transpose();
    x.noalias() = -sigma * (vecs * vals.cwiseMin(0.0).asDiagonal() * vecs.transpose());

    if (iter % 200 == 0) {
      double p2 = (x.trace() - 1.0) * (x.trace() - 1.0);
      double d2 = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double dij;
          if (i == j) {
            dij = y0 - 1.0 - z(i, j);
          } else if (edge(i, j)) {
            p2 += x(i, j) * x(i, j);
            dij = y_edges(i, j) - 1.0 - z(i, j);
          } else {
            dij = -1.0 - z(i, j);
          }
          d2 += dij * dij;
        }
      }
      const double primal_res = std::sqrt(p2);
      const double dual_res = std::sqrt(d2) / (1.0 + n);
      if (primal_res > 2.0 * dual_res) {
        sigma /= 2.0;
      } else if (dual_res > 2.0 * primal_res) {
        sigma *= 2.0;
      }
    }
    if (iter % opt.check_every == 0) {
      certify(x, y_edges, p, best);
      if (tight_enough(best, opt.tol)) break;
    }
  }
  if (iter > opt.max_iterations) {
    iter = opt.max_iterations;
    certify(x, y_edges, p, best);
  }
  return iter;
}

}  // namespace

ThetaResult theta_sdp(const Graph& g, const SdpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const int n = g.size();
  if (n < 1 || n > kSdpCap) {
    throw std::length_error("SDP theta needs 1 <= n <= " + std::to_string(kSdpCap));
  }
  if (!(options.tol >= 1e-12)) throw std::invalid_argument("SDP tolerance must be positive");

  Problem p;
  p.n = n;
  p.edges = g.edges();
  p.is_edge = Eigen::MatrixXi::Zero(n, n);
  for (const auto& [i, j] : p.edges) {
    p.is_edge(i, j) = 1;
    p.is_edge(j, i) = 1;
  }

  Bracket best;
  int iterations = 0;
  if (static_cast<int>(p.edges.size()) < options.interior_point_cap) {
    iterations = solve_interior_point(p, options, best);
  }
  if (!tight_enough(best, options.tol)) {
    iterations += solve_boundary_point(p, options, best);
  }

  ThetaResult out;
  out.method = ThetaMethod::sdp;
  out.n = n;
  out.edges_hash = edges_hash(g);
  out.value = best.mid();
  out.gap = best.half_gap();
  out.primal_witness = std::move(best.witness);
  out.dual_certificate = std::move(best.certificate);
  out.iterations = iterations;
  out.converged = out.gap <= std::max(options.tol, 1e-4 * out.value);
  out.wallclock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace thetalab
