#include "thetalab/tensor.hpp"

#include "thetalab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace thetalab {

namespace {

void enumerate(int d, int r, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == r) {
    out.push_back(cur);
    return;
  }
  const int lo = cur.empty() ? 0 : cur.back();
  for (int i = lo; i < d; ++i) {
    cur.push_back(i);
    enumerate(d, r, cur, out);
    cur.pop_back();
  }
}

double multinomial(const std::vector<int>& s) {
  double w = std::tgamma(static_cast<double>(s.size()) + 1.0);
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    w /= std::tgamma(static_cast<double>(j - i) + 1.0);
    i = j;
  }
  return std::round(w);
}

}  // namespace

SymTensor::SymTensor(int d, int r) : d_(d), r_(r) {
  if (d < 1 || r < 1) throw std::invalid_argument("SymTensor needs d >= 1 and r >= 1");
  std::vector<int> cur;
  enumerate(d, r, cur, multisets_);
  coeffs_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(multisets_.size()));
  weights_.resize(coeffs_.size());
  for (Eigen::Index k = 0; k < coeffs_.size(); ++k) weights_(k) = multinomial(multisets_[k]);
}

Eigen::Index SymTensor::position(std::vector<int> idx) const {
  if (static_cast<int>(idx.size()) != r_) throw std::invalid_argument("index tuple has wrong length");
  for (int i : idx) {
    if (i < 0 || i >= d_) throw std::out_of_range("tensor index out of range");
  }
  std::sort(idx.begin(), idx.end());
  const auto it = std::lower_bound(multisets_.begin(), multisets_.end(), idx);
  return it - multisets_.begin();
}

double SymTensor::contract(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_(k) == 0.0) continue;
    double prod = weights_(k) * coeffs_(k);
    for (int i : multisets_[k]) prod *= x(i);
    sum += prod;
  }
  return sum;
}

Eigen::VectorXd SymTensor::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d_);
  for (Eigen::Index k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_(k) == 0.0) continue;
    const auto& s = multisets_[k];
    const double c = weights_(k) * coeffs_(k);
    for (int t = 0; t < r_; ++t) {
      double prod = c;
      for (int u = 0; u < r_; ++u) {
        if (u != t) prod *= x(s[u]);
      }
      g(s[t]) += prod;
    }
  }
  return g;
}

Eigen::MatrixXd SymTensor::to_matrix() const {
  if (r_ != 2) throw std::invalid_argument("to_matrix needs r = 2");
  Eigen::MatrixXd m(d_, d_);
  for (Eigen::Index k = 0; k < coeffs_.size(); ++k) {
    const auto& s = multisets_[k];
    m(s[0], s[1]) = coeffs_(k);
    m(s[1], s[0]) = coeffs_(k);
  }
  return m;
}

SymTensor SymTensor::from_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("from_matrix needs a square matrix");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("from_matrix needs a symmetric matrix");
  }
  SymTensor t(static_cast<int>(m.rows()), 2);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    const auto& s = t.multiset(k);
    t.coeffs_(k) = 0.5 * (m(s[0], s[1]) + m(s[1], s[0]));
  }
  return t;
}

SymTensor SymTensor::rank_one(const Eigen::VectorXd& v, int r) {
  SymTensor t(static_cast<int>(v.size()), r);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    double prod = 1.0;
    for (int i : t.multiset(k)) prod *= v(i);
    t.coeffs_(k) = prod;
  }
  return t;
}

SymTensor SymTensor::operator*(double c) const {
  SymTensor out = *this;
  out.coeffs_ *= c;
  return out;
}

SymTensor SymTensor::operator+(const SymTensor& other) const {
  if (other.d_ != d_ || other.r_ != r_) throw std::invalid_argument("tensor shapes differ");
  SymTensor out = *this;
  out.coeffs_ += other.coeffs_;
  return out;
}

namespace {

double lp_norm(const Eigen::VectorXd& x, double p) {
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return scale * std::pow((x.cwiseAbs() / scale).array().pow(p).sum(), 1.0 / p);
}

Eigen::VectorXd normalize_p(const Eigen::VectorXd& x, double p) {
  Eigen::VectorXd y = x / lp_norm(x, p);
  // guard the last ulp so the result is feasible
  const double n = lp_norm(y, p);
  if (n > 1.0) y /= n;
  return y;
}

// Largest-magnitude component made positive; |<T, x^r>| does not change.
void canonical_sign(Eigen::VectorXd& x) {
  Eigen::Index i = 0;
  x.cwiseAbs().maxCoeff(&i);
  if (x(i) < 0.0) x = -x;
}

double ascend(const SymTensor& t, double sign, double p, int iterations, Eigen::VectorXd& x) {
  x = normalize_p(x, p);
  double f = sign * t.contract(x);
  double eta = 0.5;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd g = sign * t.gradient(x);
    const double gn = g.norm();
    if (gn == 0.0) break;
    bool moved = false;
    while (eta > 1e-14) {
      Eigen::VectorXd y = normalize_p(x + (eta / gn) * g, p);
      const double fy = sign * t.contract(y);
      if (fy > f) {
        x = std::move(y);
        f = fy;
        eta = std::min(2.0 * eta, 1e3);
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return f;
}

// Fixed unit steps without a value test, so the witness settles on the fixed
// point rather than wherever the line search stalls (about sqrt(eps) away).
void polish(const SymTensor& t, double sign, double p, Eigen::VectorXd& x) {
  double f = sign * t.contract(x);
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXd g = sign * t.gradient(x);
    const double gn = g.norm();
    if (gn == 0.0) return;
    Eigen::VectorXd y = normalize_p(x + g / gn, p);
    const double fy = sign * t.contract(y);
    if (fy < f - 1e-13 * std::abs(f)) return;
    const double step = (y - x).norm();
    x = std::move(y);
    f = std::max(f, fy);
    if (step <= 1e-15) return;
  }
}

Eigen::VectorXd random_start(int d, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = normal(rng);
  return x;
}

}  // namespace

InjectiveNormEstimate injective_norm(const SymTensor& t, double p, std::uint64_t seed,
                                     const InjectiveOptions& options) {
  if (!(p >= 2.0)) throw std::invalid_argument("injective norm needs p >= 2");
  if (options.restarts < 1 && options.warm_starts.empty()) {
    throw std::invalid_argument("injective norm needs restarts >= 1");
  }
  if (static_cast<double>(t.size()) * t.order() * t.order() > 1e7) {
    throw std::length_error("one gradient evaluation would exceed 1e7 operations");
  }
  std::vector<Eigen::VectorXd> starts;
  for (const auto& w : options.warm_starts) {
    if (w.size() != t.dim()) throw std::invalid_argument("warm start has wrong dimension");
    if (w.cwiseAbs().maxCoeff() > 0.0) starts.push_back(w);
  }
  for (int k = 0; k < options.restarts; ++k) {
    Rng rng(derive_seed(seed, "injective", static_cast<std::uint64_t>(k)));
    starts.push_back(random_start(t.dim(), rng));
  }

  struct Candidate {
    double value;
    Eigen::VectorXd x;
  };
  std::vector<Candidate> candidates;
  for (const auto& start : starts) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd x = start;
      ascend(t, sign, p, options.iterations, x);
      canonical_sign(x);
      candidates.push_back({std::abs(t.contract(x)), std::move(x)});
    }
  }
  double best = 0.0;
  for (const auto& c : candidates) best = std::max(best, c.value);
  // First candidate within rounding of the best, so that scaling T keeps the witness.
  InjectiveNormEstimate out;
  out.restarts_used = static_cast<int>(starts.size());
  for (const auto& c : candidates) {
    if (c.value < best * (1.0 - 1e-12)) continue;
    out.value = c.value;
    out.witness = c.x;
    // read the sign off the form so that T and -T polish alike
    const double sign = t.contract(c.x) >= 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd x = c.x;
    polish(t, sign, p, x);
    canonical_sign(x);
    const double v = std::abs(t.contract(x));
    if (v >= out.value * (1.0 - 1e-12) && lp_norm(x, p) <= 1.0 + 1e-12) {
      out.value = v;
      out.witness = std::move(x);
    }
    break;
  }
  return out;
}

namespace {

void check_series(const TensorSeries& series) {
  if (series.terms.empty()) throw std::invalid_argument("tensor series has no terms");
  if (!(series.p >= 2.0)) throw std::invalid_argument("tensor series needs p >= 2");
  for (const auto& t : series.terms) {
    if (t.dim() != series.terms[0].dim() || t.order() != series.terms[0].order()) {
      throw std::invalid_argument("tensor series terms differ in (d, r)");
    }
  }
}

}  // namespace

SeriesEstimate gaussian_series(const TensorSeries& series, int trials, int restarts,
                               std::uint64_t seed) {
  check_series(series);
  if (trials < 10) throw std::invalid_argument("gaussian series needs trials >= 10");
  SeriesEstimate out;
  out.samples.assign(trials, 0.0);
  InjectiveOptions options;
  options.restarts = restarts;
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    Rng rng(derive_seed(seed, "series-g", trial));
    std::normal_distribution<double> normal;
    SymTensor sum(series.terms[0].dim(), series.terms[0].order());
    for (const auto& term : series.terms) sum.coeffs() += normal(rng) * term.coeffs();
    out.samples[trial] = injective_norm(sum, series.p, derive_seed(seed, "series-norm", trial), options).value;
  });
  const Eigen::Map<const Eigen::VectorXd> s(out.samples.data(), trials);
  out.mean = s.mean();
  const double var = (s.array() - out.mean).square().sum() / (trials - 1);
  out.stderr_ = std::sqrt(var / trials);
  return out;
}

double nck_rhs(const TensorSeries& series, int restarts, std::uint64_t seed) {
  check_series(series);
  InjectiveOptions options;
  options.restarts = restarts;
  double sum = 0.0;
  for (std::size_t i = 0; i < series.terms.size(); ++i) {
    const double v = injective_norm(series.terms[i], series.p, derive_seed(seed, "nck", i), options).value;
    sum += v * v;
  }
  const double d = series.terms[0].dim();
  return std::pow(d, 0.5 - 1.0 / series.p) * std::sqrt(sum);
}

MomentSandwich trace_moment_sandwich(const SymTensor& m, int k, double tol) {
  if (m.order() != 2) throw std::invalid_argument("trace moment sandwich needs r = 2");
  if (m.dim() > 500) throw std::invalid_argument("trace moment sandwich needs d <= 500");
  if (k < 1) throw std::invalid_argument("trace moment sandwich needs k >= 1");
  const Eigen::MatrixXd a = m.to_matrix();
  MomentSandwich out;
  out.norm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly)
                 .eigenvalues()
                 .cwiseAbs()
                 .maxCoeff();
  const double s = a.norm();
  if (s > 0.0) {
    // Tr(M^2k) = |M^k|_F^2 for symmetric M
    const Eigen::MatrixXd b = a / s;
    Eigen::MatrixXd power = b;
    for (int i = 1; i < k; ++i) power = (power * b).eval();
    out.moment = s * std::pow(power.squaredNorm(), 1.0 / (2.0 * k));
  }
  out.upper = std::pow(static_cast<double>(m.dim()), 1.0 / (2.0 * k)) * out.norm;
  const double slack = tol * std::max(1.0, out.norm);
  out.holds = out.norm <= out.moment + slack && out.moment <= out.upper + slack;
  return out;
}

std::vector<SymTensor> tensor_family(const std::string& family, int d, int r, std::uint64_t seed) {
  std::vector<SymTensor> out;
  Rng rng(derive_seed(seed, family, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(r)));
  std::normal_distribution<double> normal;
  if (family == "random-rank-one") {
    for (int i = 0; i < d; ++i) out.push_back(SymTensor::rank_one(random_start(d, rng).normalized(), r));
  } else if (family == "coordinate") {
    for (int i = 0; i < d; ++i) out.push_back(SymTensor::rank_one(Eigen::VectorXd::Unit(d, i), r));
  } else if (family == "random-symmetric-entries") {
    for (int i = 0; i < d; ++i) {
      SymTensor t(d, r);
      for (Eigen::Index k = 0; k < t.size(); ++k) t.coeffs()(k) = normal(rng);
      out.push_back(std::move(t));
    }
  } else if (family == "single-term") {
    out.push_back(SymTensor::rank_one(Eigen::VectorXd::Unit(d, 0), r));
  } else {
    throw std::invalid_argument("unknown tensor family '" + family + "'");
  }
  return out;
}

RatioSweep conjecture_ratio_sweep(const std::string& family, const std::vector<int>& d_values,
                                  int r, double p, int trials, int restarts, std::uint64_t seed) {
  if (d_values.empty()) throw std::invalid_argument("ratio sweep needs at least one d");
  if (r != 2 && r != 3) throw std::invalid_argument("ratio sweep needs r in {2, 3}");
  if (p != 2.0 && p != 4.0) throw std::invalid_argument("ratio sweep needs p in {2, 4}");
  RatioSweep out;
  out.family = family;
  out.r = r;
  out.p = p;
  out.trials = trials;
  out.restarts = restarts;
  out.seed = seed;
  out.d_values = d_values;
  const bool aw = r == 2 && p == 2.0;
  for (int d : d_values) {
    TensorSeries series{tensor_family(family, d, r, derive_seed(seed, "sweep-family")), p};
    const SeriesEstimate lhs = gaussian_series(series, trials, restarts, derive_seed(seed, "sweep-lhs", d));
    const double rhs = nck_rhs(series, restarts, derive_seed(seed, "sweep-rhs", d));
    out.lhs_mean.push_back(lhs.mean);
    out.lhs_stderr.push_back(lhs.stderr_);
    out.lhs_samples.push_back(lhs.samples);
    out.rhs.push_back(rhs);
    out.ratio.push_back(lhs.mean / rhs);
    if (aw) {
      double sum = 0.0;
      for (const auto& t : series.terms) {
        const double n = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t.to_matrix(), Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .cwiseAbs()
                             .maxCoeff();
        sum += n * n;
      }
      const double bound = std::sqrt(std::log(d + 1.0)) * std::sqrt(sum);
      out.aw_rhs.push_back(bound);
      out.aw_ratio.push_back(lhs.mean / bound);
    }
  }
  return out;
}

}  // namespace thetalab
