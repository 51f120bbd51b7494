#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace thetalab {

/// Real measurement matrix A: N rows (measurement vectors) in R^M.
class MeasurementMatrix {
 public:
  /// Throws std::invalid_argument on an empty or non-finite matrix.
  explicit MeasurementMatrix(Eigen::MatrixXd entries);

  int rows() const { return static_cast<int>(a_.rows()); }
  int cols() const { return static_cast<int>(a_.cols()); }
  const Eigen::MatrixXd& entries() const { return a_; }

  /// Singular values at or below this count as zero.
  double rank_tolerance() const { return tol_; }

  /// Rows of A listed in `rows`, in that order.
  Eigen::MatrixXd select(const std::vector<int>& rows) const;

 private:
  Eigen::MatrixXd a_;
  double tol_ = 0.0;
};

inline constexpr int kExhaustiveRowCap = 24;
inline constexpr int kGenericRowCap = 2000;
inline constexpr double kGenericSubsetCap = 2e7;

struct OmegaResult {
  double value = 0.0;
  /// Row set S attaining the minimum; its complement is rank deficient.
  std::vector<int> argmin_subset;
  /// Recomputed rank(A restricted to the complement of S) < M.
  bool rank_deficient_complement = false;
};

/// sigma_M of the listed rows (0 when there are fewer than M of them).
double sigma_min_rows(const MeasurementMatrix& a, const std::vector<int>& rows);

/// Exact omega(A) = min { sigma_M(A_S) : rank(A_{S^c}) < M } for N <= 24.
///
/// sigma_M is monotone under adding rows, so the minimum sits at a maximal
/// rank-deficient complement: the rows lying in a hyperplane spanned by M-1
/// independent rows (or all rows, when rank A < M). Every such hyperplane is
/// enumerated. Values at or below the rank tolerance are reported as 0.
OmegaResult omega(const MeasurementMatrix& a);

class GenericityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// omega(A) for matrices in general position, N <= 2000: only the C(N, M-1)
/// complements of size M-1 are examined. Throws GenericityError when some M
/// rows are linearly dependent, since the shortcut is then unsound.
OmegaResult omega_generic(const MeasurementMatrix& a);

struct Bipartition {
  std::vector<int> first;
  std::vector<int> second;
};

struct ComplementResult {
  bool holds = false;
  /// A bipartition with neither side of rank M, when the property fails.
  std::optional<Bipartition> witness;
};

/// Checks every bipartition of the rows; N <= 24.
ComplementResult complement_property(const MeasurementMatrix& a);

/// Injectivity of x -> |Ax| up to global sign. Runs both the complement
/// property and omega and throws std::logic_error if they disagree.
bool injective_real(const MeasurementMatrix& a);

/// x, y with |Ax| = |Ay| entrywise and x != +-y, built from a violating
/// bipartition.
std::pair<Eigen::VectorXd, Eigen::VectorXd> collision_pair(const MeasurementMatrix& a,
                                                           const Bipartition& witness);

/// N x M matrix with iid standard gaussian entries.
MeasurementMatrix gaussian_measurements(int n, int m, std::uint64_t seed);

/// Least squares fit log(mean) = intercept + M log(beta).
struct DecayFit {
  double beta_hat = 0.0;
  double log_beta = 0.0;
  double intercept = 0.0;
  /// Root mean square of the residuals of the fit.
  double fit_residual = 0.0;
};

DecayFit fit_decay(const std::vector<int>& m_values, const std::vector<double>& means);

struct SweepResult {
  std::vector<int> m_values;
  int trials = 0;
  std::uint64_t seed = 0;
  /// omega and max row norm per (M index, trial).
  std::vector<std::vector<double>> omegas;
  std::vector<std::vector<double>> max_row_norms;
  std::vector<double> mean_omega;
  std::vector<double> median_omega;
  std::vector<double> log_mean_omega;
  /// Mean of omega / max_k |A_k|.
  std::vector<double> mean_omega_normalized;
  DecayFit fit;
  DecayFit fit_normalized;
  /// Samples redrawn after a genericity failure.
  int resampled = 0;
};

/// For each M in [m_lo, m_hi] draws `trials` gaussian (2M-1) x M matrices and
/// records omega by the generic path. 2 <= m_lo <= m_hi <= 12, trials >= 50.
SweepResult omega_gaussian_sweep(int m_lo, int m_hi, int trials, std::uint64_t seed);

}  // namespace thetalab
