#pragma once

#include "thetalab/graph.hpp"

namespace thetalab {

inline constexpr int kExactInvariantCap = 32;

struct GraphInvariants {
  int clique = 0;
  int independence = 0;
  int chromatic = 0;
};

// Exact branch-and-bound searches; all reject graphs above kExactInvariantCap.
int clique_number(const Graph& g);
int independence_number(const Graph& g);
int chromatic_number(const Graph& g);

/// Computes clique, independence, and chromatic numbers, and cross-checks the
/// clique search against the independent-set search on the complement.
GraphInvariants small_invariants(const Graph& g);

}  // namespace thetalab
