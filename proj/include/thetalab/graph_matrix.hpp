#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace thetalab {

/// A shape alpha: labelled vertices, ordered left side U and right side V,
/// and undirected edges between labels.
struct Shape {
  std::vector<std::string> vertices;
  std::vector<std::string> left;
  std::vector<std::string> right;
  std::vector<std::pair<std::string, std::string>> edges;
};

/// A validated shape with canonical vertex numbering: U in order as
/// 0..|U|-1, then V as |U|..|U|+|V|-1.
struct CheckedShape {
  Shape shape;
  int left_size = 0;
  int right_size = 0;
  /// Canonical endpoints, first < second, sorted.
  std::vector<std::pair<int, int>> edges;

  int vertex_count() const { return left_size + right_size; }
};

/// Throws std::invalid_argument on duplicate labels, U and V overlapping,
/// a vertex in neither side, edge endpoints outside the vertex set,
/// self-loops or repeated edges.
CheckedShape validate_shape(const Shape& shape);

/// "shape U: u1,u2 | V: v1 | E: (u1,v1),(u2,v1)"; vertices are U then V.
CheckedShape shape_from_text(const std::string& text);
std::string to_text(const CheckedShape& shape);
std::uint64_t shape_hash(const CheckedShape& shape);

/// Symmetric +-1 values eps_ij for i != j, a pure function of (seed, i, j).
class RademacherField {
 public:
  RademacherField(int n, std::uint64_t seed) : n_(n), seed_(seed) {}
  int size() const { return n_; }
  double operator()(int i, int j) const;

 private:
  int n_;
  std::uint64_t seed_;
};

inline constexpr double kRealizeEntryCap = 1e8;

struct GraphMatrix {
  CheckedShape shape;
  int n = 0;
  /// Rows indexed by tuples (a_0..a_{|U|-1}) as sum a_k n^(|U|-1-k), columns
  /// likewise; tuples with a repeated index give zero rows and columns.
  Eigen::MatrixXd matrix;
};

/// Dense realization: entry (a, b) sums, over injective maps phi of the
/// shape vertices sending U to a and V to b, the product of eps over the
/// images of the edges. Requires n >= |V(alpha)| and at most 1e8 entries.
GraphMatrix realize(const CheckedShape& shape, int n, std::uint64_t seed);

struct NormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Spectral norm by Lanczos iteration on M^T M (or M M^T, whichever is
/// smaller) from a seeded random start, with full reorthogonalization. The
/// top Ritz value never exceeds the true value; iteration stops once its
/// residual drops below tol relative.
NormEstimate norm_estimate(const Eigen::MatrixXd& m, double tol = 1e-8, std::uint64_t seed = 1);

struct ExponentFit {
  std::uint64_t shape_hash = 0;
  std::vector<int> n_values;
  int trials = 0;
  std::uint64_t seed = 0;
  /// norms[i][t] for n_values[i], trial t.
  std::vector<std::vector<double>> norms;
  std::vector<double> mean_norms;
  /// Least squares slope of log mean norm against log n.
  double f_hat = 0.0;
  double intercept = 0.0;
  /// log mean norm minus the fitted line, per n.
  std::vector<double> fit_residuals;
  /// Slope of those residuals against log log n; evidence about the
  /// polylog factor, not an estimate of it.
  double residual_loglog_slope = 0.0;
};

/// Needs at least 4 distinct sizes and trials >= 1.
ExponentFit exponent_sweep(const CheckedShape& shape, const std::vector<int>& n_values, int trials,
                           std::uint64_t seed);

}  // namespace thetalab
