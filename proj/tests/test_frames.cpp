#include "oracles.hpp"

#include "thetalab/frames.hpp"
#include "thetalab/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace thetalab;

namespace {

Eigen::MatrixXcd random_unitary(int d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = {normal(rng), normal(rng)};
  }
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
}

}  // namespace

TEST(Mub, PrimeSystems) {
  for (int d : {2, 3, 5, 7, 11, 13}) {
    const MubSystem s = mub_prime(d);
    EXPECT_EQ(static_cast<int>(s.bases.size()), d + 1);
    const VerificationReport r = verify_mub(s, 1e-10);
    EXPECT_TRUE(r.pass) << "d=" << d;
    EXPECT_LE(r.max_unbiasedness_dev, 1e-12);
    EXPECT_LE(r.max_orthogonality_dev, 1e-12);
  }
  EXPECT_THROW(mub_prime(6), std::invalid_argument);
  EXPECT_THROW(mub_prime(1), std::invalid_argument);
}

TEST(Mub, StandardTwiceIsBiased) {
  for (int d : {2, 3, 5}) {
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    const VerificationReport r = verify_mub({d, {id, id}}, 1e-10);
    EXPECT_FALSE(r.pass);
    EXPECT_NEAR(r.max_unbiasedness_dev, 1.0 - 1.0 / d, 1e-12);
  }
}

TEST(Mub, RandomUnitaryIsBiased) {
  const int d = 5;
  const VerificationReport r = verify_mub({d, {Eigen::MatrixXcd::Identity(d, d), random_unitary(d, 4)}}, 1e-10);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_unbiasedness_dev, 1e-3);
}

TEST(Mub, UnitaryInvariance) {
  const MubSystem s = mub_prime(7);
  const Eigen::MatrixXcd u = random_unitary(7, 9);
  MubSystem rotated{7, {}};
  for (const auto& b : s.bases) rotated.bases.push_back(u * b);
  const VerificationReport r = verify_mub(rotated, 1e-10);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_unbiasedness_dev, 1e-12);
}

TEST(Etf, Paley) {
  for (int p : {5, 13, 17, 29, 37}) {
    const FrameMatrix f = paley_etf(p);
    EXPECT_EQ(f.d(), (p + 1) / 2);
    EXPECT_EQ(f.n(), p + 1);
    const VerificationReport r = verify_etf(f, 1e-9);
    EXPECT_TRUE(r.pass) << "p=" << p;
    EXPECT_NEAR(r.coherence, welch_bound(f.d(), f.n()), 1e-10);
    EXPECT_NEAR(r.coherence, 1.0 / std::sqrt(static_cast<double>(p)), 1e-10);
  }
  EXPECT_THROW(paley_etf(11), std::invalid_argument);
  EXPECT_THROW(paley_etf(21), std::invalid_argument);
}

TEST(Etf, OrthonormalBasisIsNotEquiangularFrame) {
  const FrameMatrix f(Eigen::MatrixXcd::Identity(4, 4));
  const VerificationReport r = verify_etf(f, 1e-9);
  EXPECT_EQ(r.coherence, 0.0);
  EXPECT_EQ(r.welch_bound, 0.0);
  EXPECT_LE(r.tightness_dev, 1e-15);
}

TEST(Etf, UnitaryInvariance) {
  const FrameMatrix f = paley_etf(13);
  const FrameMatrix g(random_unitary(f.d(), 2) * f.columns());
  const VerificationReport a = verify_etf(f, 1e-9);
  const VerificationReport b = verify_etf(g, 1e-9);
  EXPECT_TRUE(b.pass);
  EXPECT_NEAR(a.coherence, b.coherence, 1e-12);
}

TEST(Welch, BoundsRandomFrames) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    std::normal_distribution<double> normal;
    const int d = 2 + static_cast<int>(s % 5);
    const int n = d + 1 + static_cast<int>(s % 7);
    Eigen::MatrixXcd c(d, n);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < n; ++j) c(i, j) = {normal(rng), normal(rng)};
    }
    const FrameMatrix f = FrameMatrix::normalized(c);
    EXPECT_GE(coherence(f), welch_bound(d, n) - 1e-12);
  }
  EXPECT_EQ(welch_bound(4, 3), 0.0);
}

TEST(FrameMatrix, Validation) {
  EXPECT_THROW(FrameMatrix(Eigen::MatrixXcd::Ones(2, 2)), std::invalid_argument);
  EXPECT_THROW(FrameMatrix::normalized(Eigen::MatrixXcd::Zero(2, 2)), std::invalid_argument);
  EXPECT_THROW(FrameMatrix(Eigen::MatrixXcd(0, 0)), std::invalid_argument);
}

TEST(Rip, SingleColumns) {
  const ConditionStats s = rip_condition_sample(paley_etf(13), 1, 100, 3);
  for (double c : s.condition_numbers) EXPECT_NEAR(c, 1.0, 1e-12);
  EXPECT_EQ(s.rank_deficient, 0);
}

TEST(Rip, ThreeColumnsAgainstSvd) {
  const FrameMatrix f = paley_etf(29);
  const ConditionStats s = rip_condition_sample(f, 3, 200, 5);
  EXPECT_EQ(s.rank_deficient, 0);
  EXPECT_GE(s.min, 1.0);
  EXPECT_LE(s.q10, s.q50);
  EXPECT_LE(s.q50, s.q90);
  EXPECT_LE(s.q90, s.q99);
  EXPECT_LE(s.q99, s.max);
  // Three columns with coherence mu: sigma^2 lies in [1 - 2 mu, 1 + 2 mu].
  const double mu = coherence(f);
  EXPECT_LE(s.max, std::sqrt((1 + 2 * mu) / (1 - 2 * mu)) + 1e-9);
  EXPECT_EQ(rip_condition_sample(f, 3, 200, 5).condition_numbers, s.condition_numbers);
}

TEST(Rip, MoreColumnsThanDimension) {
  const FrameMatrix f = paley_etf(13);
  const ConditionStats s = rip_condition_sample(f, f.d() + 1, 30, 1);
  EXPECT_EQ(s.rank_deficient, 30);
  for (double c : s.condition_numbers) EXPECT_TRUE(std::isinf(c));
  EXPECT_TRUE(std::isinf(s.min));
  EXPECT_THROW(rip_condition_sample(f, 0, 10, 1), std::invalid_argument);
  EXPECT_THROW(rip_condition_sample(f, 3, 0, 1), std::invalid_argument);
}

TEST(Sic, SmallDimensions) {
  for (int d : {2, 3}) {
    const SicResult r = sic_search(d, 16, 2000, 7);
    EXPECT_EQ(r.frame.n(), d * d);
    EXPECT_TRUE(r.reached) << "d=" << d;
    EXPECT_NEAR(r.coherence, 1.0 / std::sqrt(d + 1.0), 1e-6);
    EXPECT_NEAR(r.coherence, coherence(r.frame), 1e-15);
  }
  EXPECT_THROW(sic_search(2, 0, 100, 1), std::invalid_argument);
  EXPECT_THROW(sic_search(9, 1, 100, 1), std::invalid_argument);
}
