#include "thetalab/invariants.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace thetalab {

namespace {

using Mask = std::uint32_t;

std::vector<Mask> masks_of(const Graph& g) {
  if (g.size() > kExactInvariantCap) {
    throw std::length_error("exact invariants need n <= 32, got " + std::to_string(g.size()));
  }
  std::vector<Mask> rows(g.size(), 0);
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) {
      if (g.adjacent(i, j)) rows[i] |= Mask{1} << j;
    }
  }
  return rows;
}

void grow_clique(const std::vector<Mask>& adj, Mask candidates, int size, int& best) {
  if (candidates == 0) {
    best = std::max(best, size);
    return;
  }
  while (candidates != 0) {
    if (size + std::popcount(candidates) <= best) return;
    const int v = std::countr_zero(candidates);
    candidates &= candidates - 1;
    grow_clique(adj, candidates & adj[v], size + 1, best);
  }
}

// Include/exclude branching on the lowest remaining vertex.
int max_independent(const std::vector<Mask>& adj, Mask remaining) {
  if (remaining == 0) return 0;
  const int v = std::countr_zero(remaining);
  const Mask rest = remaining & ~(Mask{1} << v);
  if ((adj[v] & rest) == 0) return 1 + max_independent(adj, rest);
  return std::max(1 + max_independent(adj, rest & ~adj[v]), max_independent(adj, rest));
}

Mask all_vertices(int n) { return n == 32 ? ~Mask{0} : (Mask{1} << n) - 1; }

class Colorer {
 public:
  Colorer(const std::vector<Mask>& adj, int colors)
      : adj_(adj), colors_(colors), color_(adj.size(), -1) {
    order_.resize(adj.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return std::popcount(adj[a]) > std::popcount(adj[b]);
    });
  }

  bool solve() { return assign(0, 0); }

 private:
  bool assign(std::size_t pos, int used) {
    if (pos == order_.size()) return true;
    const int v = order_[pos];
    Mask forbidden = 0;
    for (std::size_t q = 0; q < pos; ++q) {
      const int u = order_[q];
      if ((adj_[v] >> u) & 1u) forbidden |= Mask{1} << color_[u];
    }
    // Opening a new colour is symmetric across unused colours; try it once.
    const int limit = std::min(colors_, used + 1);
    for (int c = 0; c < limit; ++c) {
      if ((forbidden >> c) & 1u) continue;
      color_[v] = c;
      if (assign(pos + 1, std::max(used, c + 1))) return true;
    }
    color_[v] = -1;
    return false;
  }

  const std::vector<Mask>& adj_;
  int colors_;
  std::vector<int> color_;
  std::vector<int> order_;
};

}  // namespace

int clique_number(const Graph& g) {
  const auto adj = masks_of(g);
  int best = 0;
  grow_clique(adj, all_vertices(g.size()), 0, best);
  return best;
}

int independence_number(const Graph& g) {
  const auto adj = masks_of(g);
  return max_independent(adj, all_vertices(g.size()));
}

int chromatic_number(const Graph& g) {
  const auto adj = masks_of(g);
  if (g.size() == 0) return 0;
  for (int k = std::max(1, clique_number(g));; ++k) {
    if (Colorer(adj, k).solve()) return k;
  }
}

GraphInvariants small_invariants(const Graph& g) {
  GraphInvariants out;
  out.clique = clique_number(g);
  out.independence = independence_number(g);
  out.chromatic = chromatic_number(g);
  if (out.clique != independence_number(complement(g))) {
    throw std::logic_error("clique search disagrees with independent-set search on complement");
  }
  return out;
}

}  // namespace thetalab
