#include "oracles.hpp"

#include "thetalab/phase.hpp"
#include "thetalab/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace thetalab;

namespace {

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
  Eigen::MatrixXd a(r.size(), r.begin()->size());
  int i = 0;
  for (const auto& row : r) {
    int j = 0;
    for (double v : row) a(i, j++) = v;
    ++i;
  }
  return a;
}

// Random instance, sometimes with repeated or degenerate rows so that both
// outcomes of the complement property occur.
Eigen::MatrixXd random_instance(std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const int m = 1 + static_cast<int>(rng() % 4);
  const int n = m + static_cast<int>(rng() % (10 - m));
  Eigen::MatrixXd a(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = normal(rng);
  }
  const int style = static_cast<int>(rng() % 4);
  if (style == 1 && n > 1) {
    a.row(n - 1) = a.row(0);  // repeated row
  } else if (style == 2) {
    for (int i = 0; i < n; i += 2) a(i, m - 1) = 0.0;  // rows in a hyperplane
  } else if (style == 3) {
    a.col(0).setZero();
  }
  return a;
}

}  // namespace

TEST(Omega, OneByOne) {
  const OmegaResult r = omega(MeasurementMatrix(rows({{-3.5}})));
  EXPECT_NEAR(r.value, 3.5, 1e-15);
  EXPECT_EQ(r.argmin_subset, std::vector<int>{0});
}

TEST(Omega, ThreeRowsInPlane) {
  const double s = 1.0 / std::sqrt(2.0);
  const MeasurementMatrix a(rows({{1, 0}, {0, 1}, {s, s}}));
  const OmegaResult r = omega(a);
  const double expect = std::sqrt(1.0 - std::sqrt(2.0) / 2.0);
  EXPECT_NEAR(r.value, expect, 1e-12);
  EXPECT_NEAR(r.value, 0.5412, 1e-4);
  EXPECT_TRUE(r.rank_deficient_complement);
  // {e1, (e1+e2)/sqrt2} and {e2, (e1+e2)/sqrt2} tie by symmetry
  EXPECT_EQ(r.argmin_subset.size(), 2u);
  EXPECT_NEAR(sigma_min_rows(a, r.argmin_subset), expect, 1e-12);
  EXPECT_NEAR(oracle::omega(a.entries(), a.rank_tolerance()), expect, 1e-12);
}

TEST(Omega, RepeatedRow) {
  const MeasurementMatrix a(rows({{1, 0}, {1, 0}, {0, 1}}));
  EXPECT_EQ(omega(a).value, 0.0);
}

TEST(Omega, RejectsLarge) {
  EXPECT_THROW(omega(MeasurementMatrix(Eigen::MatrixXd::Ones(25, 2))), std::length_error);
  EXPECT_THROW(complement_property(MeasurementMatrix(Eigen::MatrixXd::Ones(25, 2))), std::length_error);
}

TEST(Omega, MeasurementMatrixValidation) {
  EXPECT_THROW(MeasurementMatrix(Eigen::MatrixXd(0, 2)), std::invalid_argument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(MeasurementMatrix{bad}, std::invalid_argument);
}

TEST(Omega, MatchesBruteForce) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const MeasurementMatrix a(random_instance(s));
    const OmegaResult r = omega(a);
    ASSERT_NEAR(r.value, oracle::omega(a.entries(), a.rank_tolerance()), 1e-10) << "seed " << s;
    EXPECT_TRUE(r.rank_deficient_complement);
    if (r.value > 0.0) EXPECT_NEAR(sigma_min_rows(a, r.argmin_subset), r.value, 1e-12);
  }
}

TEST(ComplementProperty, Examples) {
  EXPECT_TRUE(complement_property(MeasurementMatrix(rows({{1, 0}, {0, 1}, {1, 1}}))).holds);
  const ComplementResult bad = complement_property(MeasurementMatrix(rows({{1, 0}, {1, 0}, {0, 1}})));
  ASSERT_FALSE(bad.holds);
  ASSERT_TRUE(bad.witness.has_value());
  std::vector<int> first = bad.witness->first;
  std::vector<int> second = bad.witness->second;
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  if (first.size() < second.size()) std::swap(first, second);
  EXPECT_EQ(first, (std::vector<int>{0, 1}));
  EXPECT_EQ(second, (std::vector<int>{2}));
}

TEST(ComplementProperty, TooFewRowsFails) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const int m = 2 + static_cast<int>(s % 3);
    const MeasurementMatrix a = gaussian_measurements(2 * m - 2, m, s);
    EXPECT_FALSE(complement_property(a).holds);
    EXPECT_FALSE(oracle::complement_property(a.entries(), a.rank_tolerance()));
  }
}

TEST(Injective, Examples) {
  EXPECT_TRUE(injective_real(MeasurementMatrix(rows({{1, 0}, {0, 1}, {1, 1}}))));
  const MeasurementMatrix rep(rows({{1, 0}, {1, 0}, {0, 1}}));
  EXPECT_FALSE(injective_real(rep));
  Eigen::MatrixXd zero_col = gaussian_measurements(7, 3, 5).entries();
  zero_col.col(1).setZero();
  EXPECT_FALSE(injective_real(MeasurementMatrix(zero_col)));
}

TEST(Injective, CollisionPair) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const MeasurementMatrix a(random_instance(s));
    const ComplementResult cp = complement_property(a);
    if (cp.holds) continue;
    const auto [x, y] = collision_pair(a, *cp.witness);
    const Eigen::VectorXd ax = (a.entries() * x).cwiseAbs();
    const Eigen::VectorXd ay = (a.entries() * y).cwiseAbs();
    EXPECT_LE((ax - ay).norm(), 1e-9 * std::max(1.0, ax.norm()));
    EXPECT_GT((x - y).norm(), 1e-6);
    EXPECT_GT((x + y).norm(), 1e-6);
  }
  // the e1, e1, e2 witness, written out
  const MeasurementMatrix rep(rows({{1, 0}, {1, 0}, {0, 1}}));
  const Eigen::Vector2d x(1, 1);
  const Eigen::Vector2d y(1, -1);
  EXPECT_EQ((rep.entries() * x).cwiseAbs(), (rep.entries() * y).cwiseAbs());
}

TEST(Equivalence, OmegaPositiveIffComplementProperty) {
  int disagreements = 0;
  int injective = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const MeasurementMatrix a(random_instance(10000 + s));
    const bool cp = complement_property(a).holds;
    const bool pos = omega(a).value > 1e-12;
    disagreements += cp != pos;
    injective += cp;
    ASSERT_EQ(cp, oracle::complement_property(a.entries(), a.rank_tolerance())) << "seed " << s;
  }
  EXPECT_EQ(disagreements, 0);
  EXPECT_GT(injective, 50);
  EXPECT_LT(injective, 450);
}

TEST(Omega, ScalingAndPermutation) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const Eigen::MatrixXd a = gaussian_measurements(7, 3, s).entries();
    const OmegaResult base = omega(MeasurementMatrix(a));
    const OmegaResult scaled = omega(MeasurementMatrix(-2.5 * a));
    EXPECT_NEAR(scaled.value, 2.5 * base.value, 1e-10);
    EXPECT_EQ(scaled.argmin_subset, base.argmin_subset);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
    perm.setIdentity();
    Rng rng(s);
    std::shuffle(perm.indices().data(), perm.indices().data() + 7, rng);
    EXPECT_NEAR(omega(MeasurementMatrix(perm * a)).value, base.value, 1e-12);
  }
}

TEST(Omega, MonotoneRestriction) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const MeasurementMatrix a = gaussian_measurements(9, 3, s);
    std::vector<int> order(9);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(s);
    std::shuffle(order.begin(), order.end(), rng);
    double prev = 0.0;
    for (int k = 1; k <= 9; ++k) {
      const double v = sigma_min_rows(a, std::vector<int>(order.begin(), order.begin() + k));
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
  }
}

TEST(OmegaGeneric, MatchesExhaustive) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const int m = 2 + static_cast<int>(s % 4);
    const MeasurementMatrix a = gaussian_measurements(2 * m - 1, m, 500 + s);
    EXPECT_NEAR(omega_generic(a).value, omega(a).value, 1e-10);
    EXPECT_NEAR(omega_generic(a).value, oracle::omega(a.entries(), a.rank_tolerance()), 1e-10);
  }
  EXPECT_THROW(omega_generic(MeasurementMatrix(rows({{1, 0}, {1, 0}, {0, 1}}))), GenericityError);
}

TEST(Sweep, GaussianTwoByThree) {
  const SweepResult r = omega_gaussian_sweep(2, 2, 500, 3);
  for (double w : r.omegas[0]) EXPECT_GT(w, 0.0);
  for (int t = 0; t < 50; ++t) {
    const MeasurementMatrix a = gaussian_measurements(3, 2, derive_seed(3, "phase-omega", 2, t));
    EXPECT_GT(oracle::omega(a.entries(), a.rank_tolerance()), 0.0);
  }
}

TEST(Sweep, DecayAndDeterminism) {
  const SweepResult r = omega_gaussian_sweep(3, 7, 60, 17);
  EXPECT_LT(r.fit.log_beta, 0.0);
  EXPECT_GT(r.fit.beta_hat, 0.0);
  EXPECT_LT(r.fit.beta_hat, 1.0);
  EXPECT_EQ(r.mean_omega.size(), 5u);
  const SweepResult again = omega_gaussian_sweep(3, 3, 60, 17);
  EXPECT_EQ(again.omegas[0], r.omegas[0]);
  EXPECT_THROW(omega_gaussian_sweep(3, 4, 10, 1), std::invalid_argument);
  EXPECT_THROW(omega_gaussian_sweep(1, 4, 50, 1), std::invalid_argument);
}

TEST(Sweep, FitDecayRecoversBeta) {
  std::vector<int> m{3, 4, 5, 6};
  std::vector<double> means;
  for (int k : m) means.push_back(2.0 * std::pow(0.3, k));
  const DecayFit f = fit_decay(m, means);
  EXPECT_NEAR(f.beta_hat, 0.3, 1e-12);
  EXPECT_NEAR(f.fit_residual, 0.0, 1e-12);
}
