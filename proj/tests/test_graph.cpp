#include "oracles.hpp"

#include "thetalab/graph.hpp"
#include "thetalab/invariants.hpp"
#include "thetalab/rng.hpp"
#include "thetalab/theta.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace thetalab;

namespace {

Graph complete(int n) {
  GraphBuilder b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) b.add_edge(i, j);
  }
  return std::move(b).build();
}

Graph cycle(int n) { return build_circulant(CirculantSpec(n, {1})); }

}  // namespace

TEST(Circulant, NineCycle) {
  const Graph g = build_circulant(CirculantSpec(9, {1}));
  for (int v = 0; v < 9; ++v) EXPECT_EQ(g.degree(v), 2);
  EXPECT_EQ(g.edge_count(), 9u);
}

TEST(Circulant, NineTwoThree) {
  const Graph g = build_circulant(CirculantSpec(9, {2, 3}));
  for (int v = 0; v < 9; ++v) EXPECT_EQ(g.degree(v), 4);
  EXPECT_EQ(g.neighbors(0), (std::vector<int>{2, 3, 6, 7}));
}

TEST(Circulant, EmptyConnection) {
  const Graph g = build_circulant(CirculantSpec(4, {}));
  EXPECT_EQ(g.size(), 4);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Circulant, RejectsBadShifts) {
  EXPECT_THROW(CirculantSpec(9, {0}), std::invalid_argument);
  EXPECT_THROW(CirculantSpec(9, {5}), std::invalid_argument);
}

TEST(Circulant, EdgeRuleAndShiftAutomorphism) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const CirculantSpec spec = sample_random_circulant(7 + static_cast<int>(s % 20), s);
    const Graph g = build_circulant(spec);
    const int n = g.size();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int d = ((i - j) % n + n) % n;
        const bool expect = i != j && (std::find(spec.conn().begin(), spec.conn().end(), std::min(d, n - d)) !=
                                       spec.conn().end());
        ASSERT_EQ(g.adjacent(i, j), expect);
      }
    }
    std::vector<int> shift(n);
    for (int i = 0; i < n; ++i) shift[i] = (i + 1) % n;
    EXPECT_TRUE(is_isomorphism(g, g, shift));
  }
}

TEST(ErSampler, Extremes) {
  EXPECT_EQ(sample_er(5, 0.0, 7).edge_count(), 0u);
  EXPECT_EQ(sample_er(5, 1.0, 7), complete(5));
  EXPECT_THROW(sample_er(5, 1.5, 7), std::invalid_argument);
}

TEST(ErSampler, EdgeCountConcentration) {
  const double pairs = 200.0 * 199.0 / 2.0;
  const double sd = std::sqrt(pairs * 0.25);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const double count = static_cast<double>(sample_er(200, 0.5, s).edge_count());
    EXPECT_LE(std::abs(count - pairs / 2.0), 4.0 * sd);
  }
}

TEST(ErSampler, Deterministic) { EXPECT_EQ(sample_er(40, 0.3, 11), sample_er(40, 0.3, 11)); }

TEST(RandomCirculant, SmallCases) {
  bool saw_k2 = false;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const CirculantSpec spec = sample_random_circulant(2, s);
    if (!spec.conn().empty()) {
      EXPECT_EQ(spec.conn(), std::vector<int>{1});
      EXPECT_EQ(build_circulant(spec), complete(2));
      saw_k2 = true;
    }
  }
  EXPECT_TRUE(saw_k2);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const CirculantSpec spec = sample_random_circulant(9, s);
    for (int k : spec.conn()) {
      EXPECT_GE(k, 1);
      EXPECT_LE(k, 4);
    }
  }
}

TEST(RandomCirculant, MeanSize) {
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) sum += static_cast<double>(sample_random_circulant(64, s).conn().size());
  // 32 fair bits per draw, mean 16, variance 8 per draw
  const double sd = std::sqrt(8.0 / 1000.0);
  EXPECT_LE(std::abs(sum / 1000.0 - 16.0), 4.0 * sd);
}

TEST(Paley, FiveIsC5) {
  EXPECT_EQ(build_paley(5).conn(), std::vector<int>{1});
  EXPECT_EQ(build_circulant(build_paley(5)), cycle(5));
}

TEST(Paley, Degrees) {
  for (int p : {5, 13, 17, 29}) {
    const Graph g = build_circulant(build_paley(p));
    for (int v = 0; v < p; ++v) EXPECT_EQ(g.degree(v), (p - 1) / 2);
  }
}

TEST(Paley, RejectsBadPrimes) {
  EXPECT_THROW(build_paley(7), std::invalid_argument);
  EXPECT_THROW(build_paley(15), std::invalid_argument);
}

TEST(Complement, Basics) {
  EXPECT_EQ(complement(Graph(4)), complete(4));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Graph g = sample_er(15, 0.4, s);
    EXPECT_EQ(complement(complement(g)), g);
  }
}

TEST(Complement, PaleySelfComplementary) {
  const Graph g = build_circulant(build_paley(13));
  // 2 is a non-residue mod 13
  std::vector<int> perm(13);
  for (int i = 0; i < 13; ++i) perm[i] = 2 * i % 13;
  EXPECT_TRUE(is_isomorphism(g, complement(g), perm));
}

TEST(Localize, PaleyThirteen) {
  const Graph g = build_circulant(build_paley(13));
  const int pin = 0;
  const Localization loc = localize(g, std::span<const int>(&pin, 1));
  EXPECT_EQ(loc.graph.size(), 6);
  EXPECT_EQ(loc.labels, (std::vector<int>{1, 3, 4, 9, 10, 12}));
  const PaleyLocalization pl = paley_localization(13);
  EXPECT_EQ(pl.spec.n(), 6);
  // The circulant form is isomorphic to the induced subgraph via k -> h^k.
  std::vector<int> perm(6);
  for (int k = 0; k < 6; ++k) {
    perm[k] = static_cast<int>(std::find(loc.labels.begin(), loc.labels.end(), pl.residue_of[k]) - loc.labels.begin());
  }
  EXPECT_TRUE(is_isomorphism(build_circulant(pl.spec), loc.graph, perm));
}

TEST(Localize, SmallCases) {
  const int pin = 0;
  EXPECT_EQ(localize(complete(4), std::span<const int>(&pin, 1)).graph, complete(3));
  EXPECT_EQ(localize(Graph(4), std::span<const int>(&pin, 1)).graph.size(), 0);
}

TEST(Localize, VertexCountIsDegree) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Graph g = sample_er(20, 0.5, s);
    const int v = static_cast<int>(s % 20);
    EXPECT_EQ(localize(g, std::span<const int>(&v, 1)).graph.size(), g.degree(v));
  }
}

TEST(StrongProduct, Basics) {
  EXPECT_EQ(strong_product(complete(2), complete(2)), complete(4));
  const Graph g = sample_er(7, 0.5, 3);
  EXPECT_EQ(strong_product(g, Graph(1)), g);
  EXPECT_EQ(oracle::independence(strong_product(cycle(5), cycle(5))), 5);
  EXPECT_THROW(strong_product(Graph(100), Graph(100)), std::length_error);
}

TEST(StrongProduct, Supermultiplicative) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Graph g = sample_er(3 + static_cast<int>(s % 3), 0.5, s);
    const int a = oracle::independence(g);
    EXPECT_GE(independence_number(strong_power(g, 2)), a * a);
  }
}

TEST(Invariants, KnownGraphs) {
  const GraphInvariants c5 = small_invariants(cycle(5));
  EXPECT_EQ(c5.clique, 2);
  EXPECT_EQ(c5.independence, 2);
  EXPECT_EQ(c5.chromatic, 3);
  const GraphInvariants k6 = small_invariants(complete(6));
  EXPECT_EQ(k6.clique, 6);
  EXPECT_EQ(k6.independence, 1);
  EXPECT_EQ(k6.chromatic, 6);
  EXPECT_EQ(clique_number(build_circulant(build_paley(13))), 3);
  EXPECT_THROW(small_invariants(Graph(33)), std::length_error);
}

TEST(Invariants, MatchBruteForce) {
  for (std::uint64_t s = 0; s < 500; ++s) {
    const int n = 1 + static_cast<int>(s % 12);
    const Graph g = sample_er(n, 0.2 + 0.6 * static_cast<double>(s % 5) / 4.0, s);
    const GraphInvariants inv = small_invariants(g);
    ASSERT_EQ(inv.clique, oracle::clique(g));
    ASSERT_EQ(inv.clique, oracle::independence(complement(g)));
    ASSERT_EQ(inv.independence, oracle::independence(g));
    if (n <= 9) ASSERT_EQ(inv.chromatic, oracle::chromatic(g));
  }
}

TEST(Graphs, WellFormed) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const int n = 1 + static_cast<int>(s % 70);
    const Graph g = (s % 2) ? sample_er(n, 0.5, s) : build_circulant(sample_random_circulant(std::max(n, 2), s));
    ASSERT_TRUE(g.well_formed());
    ASSERT_TRUE(complement(g).well_formed());
  }
}

TEST(Shannon, Bounds) {
  const ShannonBounds one = shannon_bounds(cycle(5), 1);
  EXPECT_EQ(one.alpha_power, 2);
  EXPECT_NEAR(one.lower, 2.0, 1e-12);
  EXPECT_NEAR(one.theta, std::sqrt(5.0), 1e-4);
  const ShannonBounds two = shannon_bounds(cycle(5), 2);
  EXPECT_EQ(two.alpha_power, 5);
  EXPECT_NEAR(two.lower, std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(two.theta, std::sqrt(5.0), 1e-4);
  const ShannonBounds k3 = shannon_bounds(complete(3), 2);
  EXPECT_NEAR(k3.lower, 1.0, 1e-12);
  EXPECT_NEAR(k3.theta, 1.0, 1e-4);
}

TEST(TextFormat, RoundTrip) {
  const Graph g = sample_er(12, 0.5, 9);
  EXPECT_EQ(graph_from_text(to_text(g)), g);
  EXPECT_THROW(graph_from_text("n 3\n0 1\n0 1\n"), std::invalid_argument);
  EXPECT_THROW(graph_from_text("n 3\n0 5\n"), std::invalid_argument);
  const CirculantSpec spec(11, {1, 4});
  EXPECT_EQ(circulant_from_text(to_text(spec)), spec);
}
