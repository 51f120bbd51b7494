#pragma once

#include "thetalab/graph.hpp"
#include "thetalab/lp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace thetalab {

/// The four linear programs for the theta number of a circulant graph: the
/// 'time' programs work with the first row x of the circulant matrix, the
/// 'frequency' programs with its discrete Fourier transform.
enum class CirculantFormulation { time_primal, time_dual, freq_primal, freq_dual };

enum class ThetaMethod { lp_time_primal, lp_freq_primal, lp_freq_dual, lp_time_dual, sdp };

std::string to_string(ThetaMethod method);
ThetaMethod method_from_string(const std::string& name);
ThetaMethod method_of(CirculantFormulation formulation);

struct ThetaResult {
  double value = 0.0;
  /// Half-width of the certified bracket [value - gap, value + gap].
  double gap = 0.0;
  ThetaMethod method = ThetaMethod::sdp;
  int n = 0;
  /// Connection set when the input was a circulant.
  std::optional<std::vector<int>> conn;
  /// FNV-1a hash of the sorted edge list when the input was a general graph.
  std::optional<std::uint64_t> edges_hash;
  /// LP: the unfolded length-n optimal vector of the chosen program.
  /// SDP: a feasible PSD matrix X (unit trace, zero on edges).
  Eigen::MatrixXd primal_witness;
  /// LP: multipliers of the chosen program.
  /// SDP: matrix K with K_ii = 1, K_ij = 1 off edges, whose top eigenvalue
  /// upper-bounds theta.
  Eigen::MatrixXd dual_certificate;
  /// False when the iteration cap was hit before the gap target.
  bool converged = true;
  int iterations = 0;
  double wallclock_ms = 0.0;

  double lower() const { return value - gap; }
  double upper() const { return value + gap; }
};

inline constexpr int kCirculantLpCap = 100000;

/// Builds one of the four circulant programs over the folded index range
/// 0..floor(n/2); x_k = x_{n-k} symmetry is imposed by the folding and the
/// complex DFT rows reduce to cosine rows. Returned in maximization form:
/// for the two minimization programs the theta value is 1 - (LP optimum).
LpProblem circulant_lp(const CirculantSpec& spec, CirculantFormulation formulation);

/// Unfolds a folded vector (length floor(n/2)+1) to the symmetric length-n
/// vector it represents.
Eigen::VectorXd unfold_symmetric(const Eigen::VectorXd& folded, int n);

ThetaResult theta_circulant(const CirculantSpec& spec,
                            CirculantFormulation formulation = CirculantFormulation::freq_primal);

/// Runs the frequency primal and frequency dual programs and reports the
/// midpoint with the cross-formulation gap.
ThetaResult theta_circulant_bracket(const CirculantSpec& spec);

inline constexpr int kSdpCap = 200;

struct SdpOptions {
  double tol = 1e-6;
  int max_iterations = 20000;
  /// Certify the bracket every this many iterations.
  int check_every = 25;
  /// Graphs with fewer edges than this go to the interior point solver first.
  int interior_point_cap = 1500;
  int interior_point_iterations = 100;
};

/// Theta number of a general graph, n <= 200. Sparse-enough graphs use a
/// primal-dual interior point method; denser ones, or any run that misses
/// the target, fall through to an augmented Lagrangian (boundary point)
/// method. The result is a certified bracket: the lower end comes from a
/// repaired feasible X, the upper end from the top eigenvalue of an all-ones
/// completion.
ThetaResult theta_sdp(const Graph& g, const SdpOptions& options = {});
inline ThetaResult theta_sdp(const Graph& g, double tol) {
  SdpOptions options;
  options.tol = tol;
  return theta_sdp(g, options);
}

struct SandwichReport {
  int clique = 0;
  double theta_complement = 0.0;
  int chromatic = 0;
  bool holds = false;
};

/// omega(G) <= theta(complement G) <= chi(G) with the given slack; n <= 32.
SandwichReport sandwich_report(const Graph& g, double slack = 1e-4);

struct ProductIdentity {
  double theta_g = 0.0;
  double theta_complement = 0.0;
  double product = 0.0;
};

inline constexpr int kProductIdentityCap = 2000;
ProductIdentity product_identity_check(const CirculantSpec& spec);

struct ShannonBounds {
  int alpha = 0;          // alpha(G)
  int alpha_power = 0;    // alpha of the k-th strong power
  double lower = 0.0;     // alpha_power^(1/k)
  double theta = 0.0;
};

ShannonBounds shannon_bounds(const Graph& g, int k);

std::uint64_t edges_hash(const Graph& g);

}  // namespace thetalab
