#include "thetalab/phase.hpp"

#include "thetalab/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

namespace thetalab {

MeasurementMatrix::MeasurementMatrix(Eigen::MatrixXd entries) : a_(std::move(entries)) {
  if (a_.rows() < 1 || a_.cols() < 1) {
    throw std::invalid_argument("measurement matrix needs N >= 1 and M >= 1");
  }
  if (!a_.allFinite()) throw std::invalid_argument("measurement matrix has non-finite entries");
  tol_ = 1e-9 * std::max(1.0, a_.norm());
}

Eigen::MatrixXd MeasurementMatrix::select(const std::vector<int>& rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), a_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(k) = a_.row(rows[k]);
  return out;
}

namespace {

// Advances c (strictly increasing, values < n) to the next combination.
bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  int i = k - 1;
  while (i >= 0 && c[i] == n - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

std::vector<int> rows_of(std::uint32_t mask, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if ((mask >> i) & 1u) out.push_back(i);
  }
  return out;
}

std::vector<int> complement_rows(const std::vector<int>& rows, int n) {
  std::vector<char> in(n, 0);
  for (int r : rows) in[r] = 1;
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

bool full_rank(const MeasurementMatrix& a, const std::vector<int>& rows) {
  return sigma_min_rows(a, rows) > a.rank_tolerance();
}

OmegaResult finish(const MeasurementMatrix& a, double value, std::vector<int> subset) {
  OmegaResult out;
  out.value = value <= a.rank_tolerance() ? 0.0 : value;
  out.rank_deficient_complement = !full_rank(a, complement_rows(subset, a.rows()));
  out.argmin_subset = std::move(subset);
  return out;
}

}  // namespace

double sigma_min_rows(const MeasurementMatrix& a, const std::vector<int>& rows) {
  const int m = a.cols();
  if (static_cast<int>(rows.size()) < m) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.select(rows));
  return svd.singularValues()(m - 1);
}

OmegaResult omega(const MeasurementMatrix& a) {
  const int n = a.rows();
  const int m = a.cols();
  if (n > kExhaustiveRowCap) {
    throw std::length_error("exhaustive omega needs N <= " + std::to_string(kExhaustiveRowCap));
  }
  const double tol = a.rank_tolerance();
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (!full_rank(a, all)) return finish(a, 0.0, {});

  const Eigen::MatrixXd& rows = a.entries();
  const Eigen::MatrixXd gram = rows.transpose() * rows;
  const double slack = 1e-13 * gram.trace();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_subset;
  std::unordered_set<std::uint32_t> seen;
  std::vector<int> basis(m - 1);
  std::iota(basis.begin(), basis.end(), 0);
  Eigen::MatrixXd g(m, m);
  do {
    // Rows in the hyperplane spanned by the basis rows (the zero rows when
    // M = 1); dependent bases span nothing new and are skipped.
    std::uint32_t in_plane = 0;
    if (m == 1) {
      for (int i = 0; i < n; ++i) {
        if (rows.row(i).norm() <= tol) in_plane |= 1u << i;
      }
    } else {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.select(basis).transpose());
      qr.setThreshold(tol / std::max(1.0, rows.norm()));
      if (qr.rank() < m - 1) continue;
      const Eigen::VectorXd normal =
          qr.householderQ() * Eigen::VectorXd::Unit(m, m - 1);
      for (int i = 0; i < n; ++i) {
        if (std::abs(rows.row(i).dot(normal)) <= tol) in_plane |= 1u << i;
      }
    }
    if (!seen.insert(in_plane).second) continue;
    if (std::isfinite(best)) {
      g = gram;
      for (int i = 0; i < n; ++i) {
        if ((in_plane >> i) & 1u) g.noalias() -= rows.row(i).transpose() * rows.row(i);
      }
      const double threshold = std::max(0.0, best * best - slack);
      g.diagonal().array() -= threshold;
      if (Eigen::LLT<Eigen::MatrixXd>(g).info() == Eigen::Success) continue;
    }
    std::vector<int> subset = rows_of(~in_plane & ((1u << n) - 1), n);
    const double s = sigma_min_rows(a, subset);
    if (s < best) {
      best = s;
      best_subset = std::move(subset);
    }
  } while (next_combination(basis, n));
  return finish(a, best, std::move(best_subset));
}

OmegaResult omega_generic(const MeasurementMatrix& a) {
  const int n = a.rows();
  const int m = a.cols();
  if (n > kGenericRowCap) {
    throw std::length_error("generic omega needs N <= " + std::to_string(kGenericRowCap));
  }
  if (binomial(n, m - 1) > kGenericSubsetCap) {
    throw std::length_error("generic omega: too many (M-1)-subsets");
  }
  const double tol = a.rank_tolerance();
  std::vector<int> first(std::min(n, m - 1));
  std::iota(first.begin(), first.end(), 0);
  if (n < 2 * m - 1) {
    // Every complement of M-1 rows has fewer than M rows.
    return finish(a, 0.0, complement_rows(first, n));
  }

  const Eigen::MatrixXd& rows = a.entries();
  const Eigen::MatrixXd gram = rows.transpose() * rows;
  const double slack = 1e-13 * gram.trace();
  const bool square = n == 2 * m - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_subset;
  std::vector<int> basis = first;
  Eigen::MatrixXd g(m, m);
  do {
    if (!square && m > 1) {
      // Every M-set containing the basis must be independent.
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.select(basis).transpose());
      qr.setThreshold(tol / std::max(1.0, rows.norm()));
      if (qr.rank() < m - 1) throw GenericityError("dependent (M-1)-subset");
      const Eigen::VectorXd normal = qr.householderQ() * Eigen::VectorXd::Unit(m, m - 1);
      std::size_t next = 0;
      for (int i = 0; i < n; ++i) {
        if (next < basis.size() && basis[next] == i) {
          ++next;
        } else if (std::abs(rows.row(i).dot(normal)) <= tol) {
          throw GenericityError("dependent M-subset");
        }
      }
    }
    g = gram;
    for (int b : basis) g.noalias() -= rows.row(b).transpose() * rows.row(b);
    // Cheap exclusion: lambda_min(g) clearly above the incumbent.
    if (std::isfinite(best)) {
      const double threshold = std::max(0.0, std::max(best, tol) * std::max(best, tol) - slack);
      g.diagonal().array() -= threshold;
      if (Eigen::LLT<Eigen::MatrixXd>(g).info() == Eigen::Success) continue;
    }
    std::vector<int> subset = complement_rows(basis, n);
    const double s = sigma_min_rows(a, subset);
    if (s <= tol) {
      // In the square case the complements are exactly the M-subsets.
      throw GenericityError("rank-deficient M-subset");
    }
    if (s < best) {
      best = s;
      best_subset = std::move(subset);
    }
  } while (next_combination(basis, n));
  return finish(a, best, std::move(best_subset));
}

ComplementResult complement_property(const MeasurementMatrix& a) {
  const int n = a.rows();
  const int m = a.cols();
  if (n > kExhaustiveRowCap) {
    throw std::length_error("complement property needs N <= " +
                            std::to_string(kExhaustiveRowCap));
  }
  const double tol2 = a.rank_tolerance() * a.rank_tolerance();
  const Eigen::MatrixXd& rows = a.entries();
  // Gram eigenvalues carry rounding of order eps * trace; only a clear pass
  // is accepted there, anything closer goes to the SVD that omega uses.
  const double margin = tol2 + 1e-13 * rows.squaredNorm();
  auto spans = [&](std::uint32_t mask) {
    if (std::popcount(mask) < m) return false;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) g.noalias() += rows.row(i).transpose() * rows.row(i);
    }
    g.diagonal().array() -= margin;
    if (Eigen::LLT<Eigen::MatrixXd>(g).info() == Eigen::Success) return true;
    return full_rank(a, rows_of(mask, n));
  };
  // The last row is pinned to the second side; each bipartition is seen once.
  const std::uint32_t all = (1u << n) - 1;
  const std::uint32_t half = 1u << (n - 1);
  for (std::uint32_t mask = 0; mask < half; ++mask) {
    if (spans(mask) || spans(all & ~mask)) continue;
    ComplementResult out;
    out.holds = false;
    out.witness = Bipartition{rows_of(mask, n), rows_of(all & ~mask, n)};
    return out;
  }
  return {true, std::nullopt};
}

bool injective_real(const MeasurementMatrix& a) {
  const bool holds = complement_property(a).holds;
  const bool positive = omega(a).value > 1e-12;
  if (holds != positive) {
    throw std::logic_error("complement property and omega disagree");
  }
  return holds;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> collision_pair(const MeasurementMatrix& a,
                                                           const Bipartition& witness) {
  const int m = a.cols();
  // A unit vector orthogonal to the given rows (they do not span R^M).
  auto null_vector = [&](const std::vector<int>& rows) {
    if (rows.empty()) return Eigen::VectorXd(Eigen::VectorXd::Unit(m, 0));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.select(rows), Eigen::ComputeFullV);
    return Eigen::VectorXd(svd.matrixV().col(m - 1));
  };
  const Eigen::VectorXd u = null_vector(witness.first);
  const Eigen::VectorXd v = null_vector(witness.second);
  return {v + u, v - u};
}

MeasurementMatrix gaussian_measurements(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = normal(rng);
  }
  return MeasurementMatrix(std::move(a));
}

DecayFit fit_decay(const std::vector<int>& m_values, const std::vector<double>& means) {
  if (m_values.size() != means.size() || m_values.size() < 2) {
    throw std::invalid_argument("decay fit needs at least two points");
  }
  const auto k = static_cast<Eigen::Index>(m_values.size());
  Eigen::MatrixXd design(k, 2);
  Eigen::VectorXd target(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = m_values[i];
    target(i) = std::log(means[i]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  DecayFit fit;
  fit.intercept = coef(0);
  fit.log_beta = coef(1);
  fit.beta_hat = std::exp(coef(1));
  fit.fit_residual = std::sqrt((design * coef - target).squaredNorm() / static_cast<double>(k));
  return fit;
}

SweepResult omega_gaussian_sweep(int m_lo, int m_hi, int trials, std::uint64_t seed) {
  if (m_lo < 2 || m_hi > 12 || m_lo > m_hi) {
    throw std::invalid_argument("omega sweep needs 2 <= M_lo <= M_hi <= 12");
  }
  if (trials < 50) throw std::invalid_argument("omega sweep needs at least 50 trials");

  SweepResult out;
  out.trials = trials;
  out.seed = seed;
  for (int m = m_lo; m <= m_hi; ++m) out.m_values.push_back(m);
  const std::size_t count = out.m_values.size();
  out.omegas.assign(count, std::vector<double>(trials, 0.0));
  out.max_row_norms.assign(count, std::vector<double>(trials, 0.0));
  std::vector<int> redraws(count * trials, 0);

  parallel_for(count * trials, [&](std::size_t job) {
    const std::size_t idx = job / trials;
    const int trial = static_cast<int>(job % trials);
    const int m = out.m_values[idx];
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t key = static_cast<std::uint64_t>(trial) |
                                (static_cast<std::uint64_t>(attempt) << 32);
      const MeasurementMatrix a =
          gaussian_measurements(2 * m - 1, m, derive_seed(seed, "phase-omega", m, key));
      try {
        out.omegas[idx][trial] = omega_generic(a).value;
        out.max_row_norms[idx][trial] = a.entries().rowwise().norm().maxCoeff();
        redraws[job] = attempt;
        return;
      } catch (const GenericityError&) {
        // probability-zero event; redraw from the next stream
      }
    }
  });
  out.resampled = std::accumulate(redraws.begin(), redraws.end(), 0);

  for (std::size_t idx = 0; idx < count; ++idx) {
    const auto& w = out.omegas[idx];
    std::vector<double> sorted = w;
    std::sort(sorted.begin(), sorted.end());
    const double median = trials % 2 ? sorted[trials / 2]
                                     : 0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2]);
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / trials;
    double normalized = 0.0;
    for (int t = 0; t < trials; ++t) normalized += w[t] / out.max_row_norms[idx][t];
    out.mean_omega.push_back(mean);
    out.median_omega.push_back(median);
    out.log_mean_omega.push_back(std::log(mean));
    out.mean_omega_normalized.push_back(normalized / trials);
  }
  if (count >= 2) {
    out.fit = fit_decay(out.m_values, out.mean_omega);
    out.fit_normalized = fit_decay(out.m_values, out.mean_omega_normalized);
  }
  return out;
}

}  // namespace thetalab
