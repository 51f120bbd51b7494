#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace thetalab {

/// Symmetric order-r tensor on R^d, one coefficient per multiset of indices
/// (sorted index tuples in lexicographic order).
class SymTensor {
 public:
  SymTensor(int d, int r);

  int dim() const { return d_; }
  int order() const { return r_; }
  Eigen::Index size() const { return coeffs_.size(); }

  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }
  /// Sorted index tuple of multiset k.
  const std::vector<int>& multiset(Eigen::Index k) const { return multisets_[k]; }
  /// Position of a (not necessarily sorted) index tuple.
  Eigen::Index position(std::vector<int> idx) const;

  double& operator()(const std::vector<int>& idx) { return coeffs_(position(idx)); }
  double operator()(const std::vector<int>& idx) const { return coeffs_(position(idx)); }

  /// <T, x^(x)r>.
  double contract(const Eigen::VectorXd& x) const;
  /// Gradient of contract at x, r T(x, ..., x, .).
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  /// Symmetric d x d matrix; r must be 2.
  Eigen::MatrixXd to_matrix() const;
  static SymTensor from_matrix(const Eigen::MatrixXd& m);
  static SymTensor rank_one(const Eigen::VectorXd& v, int r);

  SymTensor operator*(double c) const;
  SymTensor operator+(const SymTensor& other) const;

 private:
  int d_;
  int r_;
  Eigen::VectorXd coeffs_;
  std::vector<std::vector<int>> multisets_;
  /// r! / prod(multiplicity!) per multiset.
  Eigen::VectorXd weights_;
};

struct InjectiveOptions {
  int restarts = 16;
  int iterations = 200;
  /// Extra starting points, run before the random restarts.
  std::vector<Eigen::VectorXd> warm_starts;
};

struct InjectiveNormEstimate {
  /// |<T, witness^(x)r>|, a certified lower bound on the injective norm.
  double value = 0.0;
  Eigen::VectorXd witness;
  int restarts_used = 0;
};

/// Lower bound on max_{|x|_p <= 1} |<T, x^(x)r>| by normalized-gradient
/// ascent with backtracking and radial l_p normalization, run for both
/// signs of the form from every start. p >= 2.
InjectiveNormEstimate injective_norm(const SymTensor& t, double p, std::uint64_t seed,
                                     const InjectiveOptions& options = {});

struct TensorSeries {
  std::vector<SymTensor> terms;
  double p = 2.0;
};

struct SeriesEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> samples;
};

/// Monte Carlo estimate of E |sum g_i T_i|_{I_p} with iid gaussian g_i;
/// trials >= 10.
SeriesEstimate gaussian_series(const TensorSeries& series, int trials, int restarts,
                               std::uint64_t seed);

/// d^(1/2 - 1/p) sqrt(sum |T_i|_{I_p}^2) with estimated term norms.
double nck_rhs(const TensorSeries& series, int restarts, std::uint64_t seed);

struct MomentSandwich {
  double norm = 0.0;    // spectral norm, from the eigenvalues
  double moment = 0.0;  // Tr(M^2k)^(1/2k), from matrix powers
  double upper = 0.0;   // d^(1/2k) * norm
  bool holds = false;
};

/// r = 2 only, d <= 500, k >= 1.
MomentSandwich trace_moment_sandwich(const SymTensor& m, int k, double tol = 1e-9);

/// Test families: "random-rank-one", "coordinate", "random-symmetric-entries",
/// and "single-term" (the one term e_1^(x)r).
std::vector<SymTensor> tensor_family(const std::string& family, int d, int r, std::uint64_t seed);

struct RatioSweep {
  std::string family;
  int r = 0;
  double p = 0.0;
  int trials = 0;
  int restarts = 0;
  std::uint64_t seed = 0;
  std::vector<int> d_values;
  /// Per d: gaussian series mean and standard error, the right-hand side,
  /// and their ratio.
  std::vector<double> lhs_mean;
  std::vector<double> lhs_stderr;
  std::vector<double> rhs;
  std::vector<double> ratio;
  /// r = p = 2 only: sqrt(log(d + 1)) sqrt(sum |M_i|^2) and the ratio to it.
  std::vector<double> aw_rhs;
  std::vector<double> aw_ratio;
  std::vector<std::vector<double>> lhs_samples;
};

/// n = d terms from the family for each d; r in {2, 3}, p in {2, 4}.
RatioSweep conjecture_ratio_sweep(const std::string& family, const std::vector<int>& d_values,
                                  int r, double p, int trials, int restarts, std::uint64_t seed);

}  // namespace thetalab
