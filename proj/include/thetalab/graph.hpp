#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace thetalab {

using Edge = std::pair<int, int>;

/// Undirected simple graph on vertices 0..n-1 with bitset adjacency rows.
///
/// Values are immutable once built; use GraphBuilder (or the free functions
/// below) to produce new graphs.
class Graph {
 public:
  Graph() = default;
  /// Edgeless graph on n vertices.
  explicit Graph(int n);
  Graph(int n, std::span<const Edge> edges);

  int size() const { return n_; }
  bool adjacent(int i, int j) const {
    return (row_ptr(i)[j >> 6] >> (j & 63)) & 1u;
  }
  int degree(int v) const;
  std::size_t edge_count() const;
  /// Edges (i, j) with i < j in lexicographic order.
  std::vector<Edge> edges() const;
  std::vector<int> neighbors(int v) const;
  std::span<const std::uint64_t> row(int i) const {
    return {row_ptr(i), static_cast<std::size_t>(words_)};
  }
  int words_per_row() const { return words_; }

  Eigen::MatrixXd adjacency_matrix() const;

  /// Symmetric, irreflexive, and no stray bits past column n-1.
  bool well_formed() const;

  /// Copy with the edge {i, j} added.
  Graph with_edge(int i, int j) const;

  bool operator==(const Graph& other) const = default;

 private:
  friend class GraphBuilder;

  const std::uint64_t* row_ptr(int i) const {
    return bits_.data() + static_cast<std::size_t>(i) * words_;
  }
  void set_edge(int i, int j);

  int n_ = 0;
  int words_ = 0;
  std::vector<std::uint64_t> bits_;
};

class GraphBuilder {
 public:
  explicit GraphBuilder(int n) : graph_(n) {}
  GraphBuilder& add_edge(int i, int j);
  int size() const { return graph_.size(); }
  Graph build() && { return std::move(graph_); }

 private:
  Graph graph_;
};

/// Circulant graph on Z_n: i ~ j iff (i - j) mod n or (j - i) mod n lies in
/// the connection set. Shifts are kept sorted and unique in 1..floor(n/2).
class CirculantSpec {
 public:
  CirculantSpec(int n, std::vector<int> conn);

  int n() const { return n_; }
  const std::vector<int>& conn() const { return conn_; }
  /// Whether shift k (any residue) is an edge class.
  bool contains(int k) const;

  bool operator==(const CirculantSpec&) const = default;

 private:
  int n_;
  std::vector<int> conn_;
};

bool is_prime(long long p);

Graph build_circulant(const CirculantSpec& spec);
CirculantSpec complement(const CirculantSpec& spec);

/// G(n, p): every unordered pair present independently with probability p.
Graph sample_er(int n, double p, std::uint64_t seed);

/// One fair bit per residue 1..ceil((n-1)/2); for even n the last bit is the
/// self-paired shift n/2.
CirculantSpec sample_random_circulant(int n, std::uint64_t seed);

/// Paley graph on Z_p, p prime and p = 1 (mod 4).
CirculantSpec build_paley(int p);

Graph complement(const Graph& g);

struct Localization {
  Graph graph;
  /// labels[k] is the original vertex that became vertex k.
  std::vector<int> labels;
};

/// Induced subgraph on the vertices adjacent to every pin (pins excluded),
/// relabeled 0..m-1 in increasing original label.
Localization localize(const Graph& g, std::span<const int> pins);

/// The 1-localization of Paley(p) written as a circulant on Z_{(p-1)/2}:
/// vertex k stands for h^k where h generates the quadratic residues.
struct PaleyLocalization {
  CirculantSpec spec;
  /// residue_of[k] = h^k mod p.
  std::vector<int> residue_of;
};
PaleyLocalization paley_localization(int p);

inline constexpr int kStrongProductCap = 4096;

/// Strong product: (u1,v1) ~ (u2,v2) iff each coordinate is equal or adjacent
/// and the pairs differ. Vertex (u, v) is numbered u * |H| + v.
Graph strong_product(const Graph& g, const Graph& h, int cap = kStrongProductCap);
Graph strong_power(const Graph& g, int k, int cap = kStrongProductCap);

/// True if i -> perm[i] maps edges of g exactly onto edges of h.
bool is_isomorphism(const Graph& g, const Graph& h, std::span<const int> perm);

// Text formats.
std::string to_text(const Graph& g);
Graph graph_from_text(std::string_view text);
std::string to_text(const CirculantSpec& spec);
CirculantSpec circulant_from_text(std::string_view text);

}  // namespace thetalab
