#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "robust_auction/dist.hpp"

using robust_auction::Dist;
using robust_auction::geometric_average;

TEST(DistCdf, PointMassAtZero) {
  const Dist d0 = Dist::point_mass(0.0);
  EXPECT_EQ(d0.cdf(0.0), 1.0);
  EXPECT_EQ(d0.cdf(-1.0), 0.0);
  EXPECT_EQ(d0.cdf_left(0.0), 0.0);
}

TEST(DistCdf, UniformIsIdentity) {
  const Dist u = Dist::uniform(0.0, 1.0);
  EXPECT_NEAR(u.cdf(0.3), 0.3, 1e-14);
  EXPECT_EQ(u.cdf(1.5), 1.0);
  EXPECT_EQ(u.cdf(-0.5), 0.0);
}

TEST(DistCdf, RightContinuousAtAtoms) {
  const Dist d = fixtures::f_disc();
  EXPECT_DOUBLE_EQ(d.cdf(1.0), 0.8);
  EXPECT_DOUBLE_EQ(d.cdf_left(1.0), 0.0);
  EXPECT_DOUBLE_EQ(d.cdf(1.5), 0.8);
  EXPECT_DOUBLE_EQ(d.cdf_left(2.0), 0.8);
  EXPECT_DOUBLE_EQ(d.cdf(2.0), 1.0);
  EXPECT_NEAR(d.survival_ge(2.0), 0.2, 1e-15);
}

TEST(DistQuantile, Examples) {
  EXPECT_NEAR(Dist::uniform(0.0, 1.0).quantile(0.5), 0.5, 1e-14);
  EXPECT_EQ(fixtures::f_disc().quantile(0.9), 2.0);
  EXPECT_EQ(fixtures::f_disc().quantile(0.8), 1.0);
  EXPECT_EQ(fixtures::f_disc().quantile(0.0), 1.0);
}

TEST(DistQuantile, ExponentialAtDefaultGrid) {
  // Linear interpolation on 4096 knots: error of order spacing^2.
  const double q = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(Dist::exponential(1.0).quantile(q), 1.0, 1e-5);
}

TEST(DistQuantile, ExponentialAtDefaultTruncation) {
  // Renormalising away the 1e-8 tail moves F(1) by about 6e-9.
  const double q = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(Dist::exponential(1.0, std::size_t{1} << 19).quantile(q), 1.0, 5e-8);
}

TEST(DistQuantile, ExponentialAtFineGridAndTail) {
  const double q = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(Dist::exponential(1.0, std::size_t{1} << 19, 1e-13).quantile(q), 1.0, 1e-9);
}

TEST(DistQuantile, RejectsOutOfRange) {
  const Dist u = Dist::uniform(0.0, 1.0);
  EXPECT_THROW(u.quantile(-0.1), std::domain_error);
  EXPECT_THROW(u.quantile(1.1), std::domain_error);
}

TEST(DistConstruction, RejectsNegativeSupport) {
  EXPECT_THROW(Dist::uniform(-1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(Dist::point_mass(-0.5), std::invalid_argument);
  EXPECT_THROW(Dist::from_points({{-1.0, 0.0, 1.0}}), std::invalid_argument);
}

TEST(DistConstruction, RejectsBadMasses) {
  EXPECT_THROW(Dist::discrete({{1.0, 0.5}, {2.0, 0.4}}), std::invalid_argument);
  EXPECT_THROW(Dist::discrete({{1.0, -0.5}, {2.0, 1.5}}), std::invalid_argument);
  EXPECT_THROW(Dist::from_points({{1.0, 0.0, 0.6}, {2.0, 0.5, 1.0}}), std::invalid_argument);
  EXPECT_THROW(Dist::from_points({{1.0, 0.0, 0.5}, {1.0, 0.5, 1.0}}), std::invalid_argument);
}

TEST(DistConstruction, MassesSumToOne) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const Dist d = fixtures::random_table(rng, 6, t % 3);
    double atoms = 0.0;
    for (const auto& a : d.atoms()) atoms += a.mass;
    EXPECT_NEAR(atoms + d.continuous_mass(), 1.0, 1e-12);
  }
}

TEST(DistConstruction, NormalTruncation) {
  const Dist n = Dist::normal(10.0, 1.0);
  EXPECT_NEAR(n.support_lo(), 2.0, 1e-12);
  EXPECT_NEAR(n.support_hi(), 18.0, 1e-12);
  EXPECT_NEAR(n.cdf(10.0), 0.5, 1e-6);
  const Dist clipped = Dist::normal(1.0, 1.0);
  EXPECT_EQ(clipped.support_lo(), 0.0);
}

TEST(DistConstruction, BetaMatchesClosedForm) {
  const Dist b = Dist::beta(2.0, 2.0);
  for (double v : {0.1, 0.25, 0.5, 0.9}) EXPECT_NEAR(b.cdf(v), 3 * v * v - 2 * v * v * v, 1e-7);
}

TEST(DistSample, Examples) {
  EXPECT_EQ(Dist::point_mass(0.0).sample(0.37), 0.0);
  EXPECT_NEAR(Dist::uniform(0.0, 1.0).sample(0.7), 0.7, 1e-14);
  EXPECT_EQ(fixtures::f_disc().sample(0.9), 2.0);
}

TEST(DistProperty, QuantileCdfGaloisConnection) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Dist> dists{Dist::uniform(0.0, 1.0), Dist::exponential(2.0, 512), fixtures::f_disc(),
                          fixtures::f_reg()};
  for (int t = 0; t < 10; ++t) dists.push_back(fixtures::random_table(rng, 5, t % 3));
  for (const auto& d : dists) {
    for (int t = 0; t < 200; ++t) {
      const double q = u(rng);
      EXPECT_GE(d.cdf(d.quantile(q)), q - 1e-12);
      const double v = d.support_lo() + u(rng) * (d.support_hi() - d.support_lo());
      if (d.cdf(v) > 1.0 - 1e-6) continue;  // inverse is ill-conditioned in the far tail
      EXPECT_LE(d.quantile(d.cdf(v)), v + 1e-10);
    }
  }
}

TEST(DistProperty, QuantileRoundTripOnContinuousSegments) {
  const Dist d = Dist::exponential(1.0, 1024);
  for (double v = 0.05; v < 10.0; v += 0.173) EXPECT_NEAR(d.quantile(d.cdf(v)), v, 1e-10);
}

TEST(GeometricAverage, IdempotentOnEqualInputs) {
  const Dist d = fixtures::f_reg();
  const Dist g = geometric_average(d, d);
  for (const auto& p : d.points()) {
    EXPECT_NEAR(g.cdf(p.value), p.cdf, 1e-12);
    EXPECT_NEAR(g.cdf_left(p.value), p.cdf_left, 1e-12);
  }
}

TEST(GeometricAverage, PointMassAtZeroAbsorbs) {
  const Dist g = geometric_average(Dist::point_mass(0.0), Dist::uniform(0.0, 1.0, 64));
  EXPECT_EQ(g.cdf(0.0), 1.0);
  EXPECT_EQ(g.cdf(0.5), 1.0);
}

TEST(GeometricAverage, BernoulliPair) {
  const double a = 0.3, b = 0.6;
  const Dist g = geometric_average(fixtures::bernoulli(a), fixtures::bernoulli(b));
  EXPECT_NEAR(1.0 - g.cdf(0.0), std::sqrt(a * b), 1e-15);
  EXPECT_EQ(g.cdf(1.0), 1.0);
}

TEST(GeometricAverage, SurvivalIdentityOnGrid) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Dist d1 = fixtures::random_table(rng, 5, t % 2);
    const Dist d2 = fixtures::random_discrete(rng, 3);
    const Dist g = geometric_average(d1, d2);
    for (const auto& p : g.points()) {
      const double s = 1.0 - g.cdf(p.value);
      EXPECT_NEAR(s * s, (1.0 - d1.cdf(p.value)) * (1.0 - d2.cdf(p.value)), 1e-12);
      const double sl = 1.0 - g.cdf_left(p.value);
      EXPECT_NEAR(sl * sl, (1.0 - d1.cdf_left(p.value)) * (1.0 - d2.cdf_left(p.value)), 1e-12);
    }
  }
}
