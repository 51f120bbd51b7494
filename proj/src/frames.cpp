#include "thetalab/frames.hpp"

#include "thetalab/graph.hpp"
#include "thetalab/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace thetalab {

using cd = std::complex<double>;

FrameMatrix::FrameMatrix(Eigen::MatrixXcd columns) : phi_(std::move(columns)) {
  if (phi_.rows() < 1 || phi_.cols() < 1) throw std::invalid_argument("frame needs d, n >= 1");
  if (!phi_.allFinite()) throw std::invalid_argument("frame has non-finite entries");
  for (Eigen::Index j = 0; j < phi_.cols(); ++j) {
    if (std::abs(phi_.col(j).norm() - 1.0) > 1e-12) {
      throw std::invalid_argument("frame column " + std::to_string(j) + " is not unit norm");
    }
  }
}

FrameMatrix FrameMatrix::normalized(Eigen::MatrixXcd columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const double norm = columns.col(j).norm();
    if (!(norm > 0)) throw std::invalid_argument("frame has a zero column");
    columns.col(j) /= norm;
  }
  return FrameMatrix(std::move(columns));
}

double welch_bound(int d, int n) {
  if (n <= d) return 0.0;
  return std::sqrt(static_cast<double>(n - d) / (static_cast<double>(n - 1) * d));
}

double coherence(const FrameMatrix& frame) {
  const Eigen::MatrixXcd g = frame.columns().adjoint() * frame.columns();
  double mu = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) mu = std::max(mu, std::abs(g(i, j)));
  }
  return mu;
}

MubSystem mub_prime(int d) {
  if (!is_prime(d)) throw std::invalid_argument("mub_prime needs a prime d, got " + std::to_string(d));
  MubSystem out;
  out.d = d;
  out.bases.push_back(Eigen::MatrixXcd::Identity(d, d));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int a = 0; a < d; ++a) {
    Eigen::MatrixXcd basis(d, d);
    for (int b = 0; b < d; ++b) {
      for (int t = 0; t < d; ++t) {
        double turns;
        if (d == 2) {
          turns = (a * t * t) / 4.0 + (b * t) / 2.0;
        } else {
          turns = static_cast<double>((a * t % d * t + b * t) % d) / d;
        }
        basis(t, b) = scale * std::polar(1.0, 2.0 * std::numbers::pi * turns);
      }
    }
    out.bases.push_back(std::move(basis));
  }
  return out;
}

VerificationReport verify_mub(const MubSystem& system, double tol) {
  const int d = system.d;
  for (const auto& basis : system.bases) {
    if (basis.rows() != d || basis.cols() != d) {
      throw std::invalid_argument("MUB bases must all be d x d");
    }
  }
  VerificationReport r;
  r.tol = tol;
  const std::size_t k = system.bases.size();
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t t = s; t < k; ++t) {
      const Eigen::MatrixXd sq =
          (system.bases[s].adjoint() * system.bases[t]).cwiseAbs2();
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (s != t) {
            r.max_unbiasedness_dev = std::max(r.max_unbiasedness_dev, std::abs(sq(i, j) - 1.0 / d));
          } else if (i == j) {
            r.max_norm_dev = std::max(r.max_norm_dev, std::abs(sq(i, j) - 1.0));
          } else {
            r.max_orthogonality_dev = std::max(r.max_orthogonality_dev, sq(i, j));
          }
        }
      }
    }
  }
  r.pass = r.max_norm_dev <= tol && r.max_orthogonality_dev <= tol &&
           r.max_unbiasedness_dev <= tol;
  return r;
}

FrameMatrix paley_etf(int p) {
  if (!is_prime(p) || p % 4 != 1) {
    throw std::invalid_argument("paley_etf needs a prime p = 1 mod 4, got " + std::to_string(p));
  }
  std::vector<int> rows{0};
  std::vector<char> residue(p, 0);
  for (long long x = 1; x < p; ++x) residue[x * x % p] = 1;
  for (int k = 1; k < p; ++k) {
    if (residue[k]) rows.push_back(k);
  }
  const int d = static_cast<int>(rows.size());
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(d, p + 1);
  const double scale = std::sqrt(2.0 / p);
  for (int t = 0; t < p; ++t) {
    phi(0, t) = scale / std::sqrt(2.0);
    for (int r = 1; r < d; ++r) {
      const double turns = static_cast<double>(static_cast<long long>(rows[r]) * t % p) / p;
      phi(r, t) = scale * std::polar(1.0, 2.0 * std::numbers::pi * turns);
    }
  }
  phi(0, p) = 1.0;
  return FrameMatrix(std::move(phi));
}

VerificationReport verify_etf(const FrameMatrix& frame, double tol) {
  const int d = frame.d();
  const int n = frame.n();
  const Eigen::MatrixXcd& phi = frame.columns();
  VerificationReport r;
  r.tol = tol;
  for (int j = 0; j < n; ++j) {
    r.max_norm_dev = std::max(r.max_norm_dev, std::abs(phi.col(j).norm() - 1.0));
  }
  Eigen::MatrixXcd s = phi * phi.adjoint();
  s.diagonal().array() -= static_cast<double>(n) / d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s, Eigen::EigenvaluesOnly);
  r.tightness_dev = es.eigenvalues().cwiseAbs().maxCoeff();

  const Eigen::MatrixXd moduli = (phi.adjoint() * phi).cwiseAbs();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      lo = std::min(lo, moduli(i, j));
      hi = std::max(hi, moduli(i, j));
    }
  }
  r.max_equiangularity_dev = n > 1 ? hi - lo : 0.0;
  r.coherence = hi;
  r.welch_bound = welch_bound(d, n);
  r.pass = r.max_norm_dev <= tol && r.tightness_dev <= tol && r.max_equiangularity_dev <= tol &&
           std::abs(r.coherence - r.welch_bound) <= tol;
  return r;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::infinity();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

ConditionStats rip_condition_sample(const FrameMatrix& frame, int m, int trials,
                                    std::uint64_t seed) {
  const int d = frame.d();
  const int n = frame.n();
  if (m < 1 || m > n) throw std::invalid_argument("rip sampling needs 1 <= m <= n");
  if (trials < 1) throw std::invalid_argument("rip sampling needs trials >= 1");
  ConditionStats out;
  out.m = m;
  out.trials = trials;
  out.condition_numbers.assign(trials, 0.0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    Rng rng(derive_seed(seed, "rip", t));
    std::vector<int> idx(n);
    for (int j = 0; j < n; ++j) idx[j] = j;
    // partial Fisher-Yates
    for (int j = 0; j < m; ++j) {
      std::uniform_int_distribution<int> pick(j, n - 1);
      std::swap(idx[j], idx[pick(rng)]);
    }
    Eigen::MatrixXcd sub(d, m);
    for (int j = 0; j < m; ++j) sub.col(j) = frame.columns().col(idx[j]);
    double cond = std::numeric_limits<double>::infinity();
    if (m <= d) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sub);
      const auto& sv = svd.singularValues();
      if (sv(m - 1) > 1e-12 * sv(0)) cond = sv(0) / sv(m - 1);
    }
    out.condition_numbers[t] = cond;
  });

  std::vector<double> finite;
  for (double c : out.condition_numbers) {
    if (std::isfinite(c)) {
      finite.push_back(c);
    } else {
      ++out.rank_deficient;
    }
  }
  std::sort(finite.begin(), finite.end());
  const double inf = std::numeric_limits<double>::infinity();
  out.min = finite.empty() ? inf : finite.front();
  out.max = finite.empty() ? inf : finite.back();
  double sum = 0.0;
  for (double c : finite) sum += c;
  out.mean = finite.empty() ? inf : sum / static_cast<double>(finite.size());
  out.q10 = quantile(finite, 0.10);
  out.q50 = quantile(finite, 0.50);
  out.q90 = quantile(finite, 0.90);
  out.q99 = quantile(finite, 0.99);
  return out;
}

namespace {

// Value and Euclidean gradient (with respect to conj(phi)) of a smooth
// function of the Gram matrix.
struct Objective {
  virtual ~Objective() = default;
  virtual double value(const Eigen::MatrixXcd& phi, Eigen::MatrixXcd* grad) const = 0;
};

// sum_{i != j} |G_ij|^4
struct FramePotential final : Objective {
  double value(const Eigen::MatrixXcd& phi, Eigen::MatrixXcd* grad) const override {
    Eigen::MatrixXcd g = phi.adjoint() * phi;
    g.diagonal().setZero();
    const Eigen::MatrixXd sq = g.cwiseAbs2();
    if (grad) *grad = 4.0 * phi * (sq.cast<cd>().cwiseProduct(g));
    return sq.cwiseAbs2().sum();
  }
};

// (1/beta) log sum_{i<j} exp(beta |G_ij|^2)
struct SmoothMax final : Objective {
  double beta;
  explicit SmoothMax(double b) : beta(b) {}
  double value(const Eigen::MatrixXcd& phi, Eigen::MatrixXcd* grad) const override {
    Eigen::MatrixXcd g = phi.adjoint() * phi;
    g.diagonal().setZero();
    const Eigen::MatrixXd sq = g.cwiseAbs2();
    const Eigen::Index n = g.cols();
    double top = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < j; ++i) top = std::max(top, sq(i, j));
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        w(i, j) = std::exp(beta * (sq(i, j) - top));
        w(j, i) = w(i, j);
        total += w(i, j);
      }
    }
    if (grad) *grad = phi * ((w / total).cast<cd>().cwiseProduct(g));
    return top + std::log(total) / beta;
  }
};

void normalize_columns(Eigen::MatrixXcd& phi) { phi.colwise().normalize(); }

// Riemannian gradient descent on the product of unit spheres with an
// adaptive step.
void descend(Eigen::MatrixXcd& phi, const Objective& f, int iters) {
  Eigen::MatrixXcd grad;
  double value = f.value(phi, &grad);
  double step = 0.1;
  for (int it = 0; it < iters; ++it) {
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      const double radial = (phi.col(j).adjoint() * grad.col(j))(0).real();
      grad.col(j) -= radial * phi.col(j);
    }
    if (grad.norm() < 1e-14) break;
    while (step > 1e-16) {
      Eigen::MatrixXcd trial = phi - step * grad;
      normalize_columns(trial);
      Eigen::MatrixXcd trial_grad;
      const double trial_value = f.value(trial, &trial_grad);
      if (trial_value < value) {
        phi = std::move(trial);
        grad = std::move(trial_grad);
        value = trial_value;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (step <= 1e-16) break;
  }
}

// Levenberg-Marquardt on r_ij = |<phi_i, phi_j>|^2 / (|phi_i|^2 |phi_j|^2) - c
// over the real and imaginary parts of all columns.
void polish_equiangular(Eigen::MatrixXcd& phi, double c, int iters) {
  const Eigen::Index d = phi.rows();
  const Eigen::Index n = phi.cols();
  const Eigen::Index pairs = n * (n - 1) / 2;
  const Eigen::Index vars = 2 * d * n;
  auto residuals = [&](const Eigen::MatrixXcd& x, Eigen::MatrixXd* jac) {
    Eigen::VectorXd r(pairs);
    if (jac) jac->setZero(pairs, vars);
    const Eigen::MatrixXcd g = x.adjoint() * x;
    Eigen::Index row = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < j; ++i, ++row) {
        const cd a = g(i, j);
        const double ni = g(i, i).real();
        const double nj = g(j, j).real();
        const double f = std::norm(a) / (ni * nj);
        r(row) = f - c;
        if (!jac) continue;
        // Wirtinger derivatives with respect to conj(phi_i), conj(phi_j)
        const Eigen::VectorXcd di = (x.col(j) * std::conj(a)) / (ni * nj) - f / ni * x.col(i);
        const Eigen::VectorXcd dj = (x.col(i) * a) / (ni * nj) - f / nj * x.col(j);
        for (Eigen::Index k = 0; k < d; ++k) {
          (*jac)(row, 2 * (i * d + k)) = 2.0 * di(k).real();
          (*jac)(row, 2 * (i * d + k) + 1) = 2.0 * di(k).imag();
          (*jac)(row, 2 * (j * d + k)) = 2.0 * dj(k).real();
          (*jac)(row, 2 * (j * d + k) + 1) = 2.0 * dj(k).imag();
        }
      }
    }
    return r;
  };
  Eigen::MatrixXd jac;
  Eigen::VectorXd r = residuals(phi, &jac);
  double lambda = 1e-3;
  for (int it = 0; it < iters && r.norm() > 1e-15; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal().array() += lambda * (1.0 + jtj.diagonal().array());
      const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);
      Eigen::MatrixXcd trial = phi;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) {
          trial(k, j) += cd(step(2 * (j * d + k)), step(2 * (j * d + k) + 1));
        }
      }
      normalize_columns(trial);
      const Eigen::VectorXd trial_r = residuals(trial, nullptr);
      if (trial_r.norm() < r.norm()) {
        phi = std::move(trial);
        r = residuals(phi, &jac);
        lambda = std::max(1e-12, lambda / 10.0);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
}

}  // namespace

SicResult sic_search(int d, int restarts, int iters, std::uint64_t seed) {
  if (d < 2 || d > 8) throw std::invalid_argument("sic_search needs 2 <= d <= 8");
  if (restarts < 1) throw std::invalid_argument("sic_search needs at least one restart");
  if (iters < 1) throw std::invalid_argument("sic_search needs iters >= 1");
  const int n = d * d;
  const double target = 1.0 / std::sqrt(d + 1.0);
  // the dense Jacobian has d^4 / 2 rows and 2 d^3 columns
  const int polish_iters = d <= 4 ? 100 : 15;

  std::vector<Eigen::MatrixXcd> found(restarts);
  std::vector<double> found_mu(restarts, std::numeric_limits<double>::infinity());
  parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
    Rng rng(derive_seed(seed, "sic", r));
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd phi(d, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < d; ++i) phi(i, j) = cd(normal(rng), normal(rng));
    }
    normalize_columns(phi);
    auto keep = [&](const Eigen::MatrixXcd& candidate) {
      const double mu = coherence(FrameMatrix::normalized(candidate));
      if (mu < found_mu[r]) {
        found_mu[r] = mu;
        found[r] = candidate;
      }
    };
    descend(phi, FramePotential{}, iters);
    keep(phi);
    if (std::abs(found_mu[r] - target) <= 1e-9) return;
    polish_equiangular(phi, target * target, polish_iters);
    keep(phi);
    if (std::abs(found_mu[r] - target) <= 1e-9) return;
    for (double beta : {1e2, 1e3, 1e4, 1e5}) {
      descend(phi, SmoothMax{beta}, std::max(1, iters / 4));
      keep(phi);
    }
    polish_equiangular(phi, target * target, polish_iters);
    keep(phi);
  });

  int best = 0;
  for (int r = 1; r < restarts; ++r) {
    if (found_mu[r] < found_mu[best]) best = r;
  }
  FrameMatrix frame = FrameMatrix::normalized(found[best]);
  const double mu = coherence(frame);
  return SicResult{std::move(frame), mu, target, std::abs(mu - target) <= 1e-6, best};
}

}  // namespace thetalab
