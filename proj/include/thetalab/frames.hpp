#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace thetalab {

/// n unit vectors in C^d stored as the columns of a d x n matrix.
class FrameMatrix {
 public:
  /// Throws std::invalid_argument if empty, non-finite, or some column is
  /// off unit norm by more than 1e-12.
  explicit FrameMatrix(Eigen::MatrixXcd columns);

  /// Rescales each (nonzero) column to unit norm first.
  static FrameMatrix normalized(Eigen::MatrixXcd columns);

  int d() const { return static_cast<int>(phi_.rows()); }
  int n() const { return static_cast<int>(phi_.cols()); }
  const Eigen::MatrixXcd& columns() const { return phi_; }

 private:
  Eigen::MatrixXcd phi_;
};

/// k orthonormal bases of C^d.
struct MubSystem {
  int d = 0;
  std::vector<Eigen::MatrixXcd> bases;
};

/// Deviations are absolute; the ones that do not apply to a check stay 0.
struct VerificationReport {
  double max_norm_dev = 0.0;
  double max_orthogonality_dev = 0.0;
  double max_unbiasedness_dev = 0.0;
  double max_equiangularity_dev = 0.0;
  double tightness_dev = 0.0;
  double coherence = 0.0;
  double welch_bound = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// sqrt((n - d) / ((n - 1) d)), or 0 when n <= d.
double welch_bound(int d, int n);

/// max |<phi_i, phi_j>| over i != j.
double coherence(const FrameMatrix& frame);

/// d + 1 mutually unbiased bases for prime d: the standard basis and the
/// quadratic-phase bases exp(2 pi i (a t^2 + b t) / d) / sqrt(d). For d = 2
/// the phases are i^(a t^2) (-1)^(b t), since t^2 = t mod 2.
MubSystem mub_prime(int d);

/// Squared moduli |<v_i^(k), v_j^(l)>|^2 against 1 (same vector),
/// 0 (same basis) and 1/d (different bases).
VerificationReport verify_mub(const MubSystem& system, double tol);

/// (p + 1)/2 x (p + 1) equiangular tight frame for prime p = 1 mod 4: the
/// rows {0} u {quadratic residues} of the p-point DFT, with the zero row
/// damped by 1/sqrt(2) and columns scaled to unit norm, plus e_0.
FrameMatrix paley_etf(int p);

/// Unit norms, spectral tightness deviation |F F* - (n/d) I|, spread of the
/// off-diagonal moduli, coherence and the Welch value.
VerificationReport verify_etf(const FrameMatrix& frame, double tol);

struct ConditionStats {
  int m = 0;
  int trials = 0;
  /// Per draw, +infinity when the column subset is rank deficient.
  std::vector<double> condition_numbers;
  int rank_deficient = 0;
  /// Over the full-rank draws; +infinity when there are none.
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q99 = 0.0;
};

/// Condition numbers of `trials` uniformly random m-column submatrices.
ConditionStats rip_condition_sample(const FrameMatrix& frame, int m, int trials,
                                    std::uint64_t seed);

struct SicResult {
  FrameMatrix frame;
  double coherence = 0.0;
  double welch_bound = 0.0;
  /// coherence within 1e-6 of 1/sqrt(d + 1).
  bool reached = false;
  int best_restart = 0;
};

/// Numerical search for d^2 equiangular lines in C^d, 2 <= d <= 8: descent
/// on the frame potential sum |<phi_i, phi_j>|^4, then on a log-sum-exp
/// smoothed max of |<phi_i, phi_j>|^2 with temperature annealed from 1e2 to
/// 1e5. Best exact coherence over the restarts.
SicResult sic_search(int d, int restarts, int iters, std::uint64_t seed);

}  // namespace thetalab
