#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "robust_auction/ironing.hpp"
#include "robust_auction/orderstat.hpp"

using namespace robust_auction;

namespace {

// Upper envelope at quantile q by brute force over all knot pairs.
double brute_envelope(const std::vector<CurvePoint>& k, double q) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : k) {
    for (const auto& b : k) {
      if (a.quantile > q || b.quantile < q) continue;
      if (a.quantile == b.quantile) {
        best = std::max({best, a.revenue, b.revenue});
        continue;
      }
      const double t = (q - a.quantile) / (b.quantile - a.quantile);
      best = std::max(best, a.revenue + t * (b.revenue - a.revenue));
    }
  }
  return best;
}

}  // namespace

TEST(RevenueCurve, TwoPointSawtooth) {
  const RevenueCurve c = revenue_curve(fixtures::f_disc());
  ASSERT_EQ(c.knots.size(), 4u);
  const double expect[4][2] = {{0.0, 0.0}, {0.2, 0.4}, {0.2, 0.2}, {1.0, 1.0}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(c.knots[i].quantile, expect[i][0], 1e-15);
    EXPECT_NEAR(c.knots[i].revenue, expect[i][1], 1e-15);
  }
}

TEST(RevenueCurve, PointMassAtZeroIsFlat) {
  const RevenueCurve c = revenue_curve(Dist::point_mass(0.0));
  for (const auto& k : c.knots) EXPECT_EQ(k.revenue, 0.0);
  EXPECT_TRUE(c.ironed_intervals.empty());
}

TEST(RevenueCurve, UniformIsParabola) {
  const RevenueCurve c = revenue_curve(Dist::uniform(0.0, 1.0));
  double best = 0.0, arg = 0.0;
  for (const auto& k : c.knots) {
    EXPECT_NEAR(k.revenue, k.quantile * (1.0 - k.quantile), 1e-12);
    if (k.revenue > best) best = k.revenue, arg = k.quantile;
  }
  EXPECT_NEAR(best, 0.25, 1e-7);
  EXPECT_NEAR(arg, 0.5, 1e-3);
  EXPECT_NEAR(c.knots.front().revenue, 0.0, 0.0);
}

TEST(Iron, ConcaveInputUnchanged) {
  for (const Dist& d : {Dist::uniform(0.0, 1.0, 257), Dist::exponential(1.0, 513), fixtures::f_reg()}) {
    const RevenueCurve c = revenue_curve(d);
    EXPECT_TRUE(c.ironed_intervals.empty()) << d.label();
    for (const auto& k : c.knots) EXPECT_NEAR(c.ironed_revenue(k.quantile), k.revenue, 1e-12);
  }
}

TEST(Iron, TwoPointEnvelope) {
  const RevenueCurve c = revenue_curve(fixtures::f_disc());
  const auto hull = c.ironed_knots();
  ASSERT_EQ(hull.size(), 3u);
  EXPECT_NEAR(hull[1].quantile, 0.2, 1e-15);
  EXPECT_NEAR(hull[1].revenue, 0.4, 1e-15);
  EXPECT_NEAR(hull[2].revenue, 1.0, 1e-15);
  ASSERT_EQ(c.ironed_intervals.size(), 1u);
  EXPECT_NEAR(c.ironed_intervals[0].lo, 0.2, 1e-15);
  EXPECT_NEAR(c.ironed_intervals[0].hi, 1.0, 1e-15);
}

TEST(Iron, TwoPointEnvelopeMatchesCurveOfPooledDistribution) {
  const RevenueCurve disc = revenue_curve(fixtures::f_disc());
  const RevenueCurve reg = revenue_curve(fixtures::f_reg());
  for (const auto& k : reg.knots) EXPECT_NEAR(disc.ironed_revenue(k.quantile), k.revenue, 1e-12);
}

TEST(IronProperty, RandomTwoPointHasTwoEdges) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int t = 0; t < 100; ++t) {
    const double v1 = u(rng), v2 = v1 + u(rng), p = u(rng);
    const RevenueCurve c = revenue_curve(Dist::two_point(v1, p, v2));
    ASSERT_LE(c.hull.size(), 3u);
    if (c.hull.size() == 3) {
      EXPECT_GE(c.edge_slope(0), c.edge_slope(1));
    }
    for (const auto& k : c.knots) EXPECT_NEAR(c.ironed_revenue(k.quantile), brute_envelope(c.knots, k.quantile), 1e-12);
  }
}

TEST(IronProperty, EnvelopeConcaveAndAboveCurve) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 40; ++t) {
    const Dist d = t % 2 ? fixtures::random_table(rng, 8, t % 4) : fixtures::random_discrete(rng, 5);
    const RevenueCurve c = revenue_curve(d);
    for (std::size_t e = 1; e + 1 < c.hull.size(); ++e) EXPECT_LE(c.edge_slope(e) - c.edge_slope(e - 1), 1e-12);
    for (std::size_t i = 0; i < c.knots.size(); ++i) {
      const double env = c.envelope_at_knot(i);
      EXPECT_GE(env, c.knots[i].revenue - 1e-12);
      EXPECT_NEAR(env, brute_envelope(c.knots, c.knots[i].quantile), 1e-12);
      bool inside = false;
      for (const auto& iv : c.ironed_intervals) inside = inside || (c.knots[i].quantile >= iv.lo && c.knots[i].quantile <= iv.hi);
      if (!inside) {
        EXPECT_NEAR(env, c.knots[i].revenue, 1e-12);
      }
    }
    EXPECT_NEAR(c.knots.front().revenue, 0.0, 1e-15);
  }
}

TEST(VirtualValues, TwoPoint) {
  const auto phi = virtual_values(fixtures::f_disc());
  EXPECT_NEAR(phi.ironed(1.0), 0.75, 1e-12);
  EXPECT_NEAR(phi.ironed(1.5), 0.75, 1e-12);
  EXPECT_NEAR(phi.ironed(2.0), 2.0, 1e-12);
  EXPECT_NEAR(phi.raw(1.0), 1.0, 1e-12);
  EXPECT_NEAR(phi.raw(2.0), 2.0, 1e-12);
  EXPECT_EQ(phi.ironed(0.5), -std::numeric_limits<double>::infinity());
  ASSERT_EQ(phi.flat_regions().size(), 1u);
  EXPECT_EQ(phi.flat_regions()[0].lo, 1.0);
  EXPECT_EQ(phi.flat_regions()[0].hi, 2.0);
}

TEST(VirtualValues, TwoPointGeneralQ) {
  for (double q : {0.6, 0.7, 0.9}) {
    EXPECT_NEAR(virtual_values(fixtures::f_disc(q)).ironed(1.0), 2.0 - 1.0 / q, 1e-12);
    EXPECT_NEAR(virtual_values(fixtures::f_reg(q)).raw(1.3), 2.0 - 1.0 / q, 1e-9);
  }
}

TEST(VirtualValues, PooledDistribution) {
  const auto phi = virtual_values(fixtures::f_reg());
  for (double v : {1.0, 1.2, 1.5, 1.99}) {
    EXPECT_NEAR(phi.raw(v), 0.75, 1e-9);
    EXPECT_NEAR(phi.ironed(v), 0.75, 1e-9);
  }
  EXPECT_NEAR(phi.ironed(2.0), 2.0, 1e-12);
}

TEST(VirtualValues, Uniform) {
  const auto phi = virtual_values(Dist::uniform(0.0, 1.0));
  for (double v = 0.01; v < 1.0; v += 0.049) EXPECT_NEAR(phi.raw(v), 2.0 * v - 1.0, 1e-3);
}

TEST(VirtualValues, ThresholdInclusiveAndStrict) {
  const auto phi = virtual_values(fixtures::f_disc());
  const double pooled = phi.ironed(1.0);
  EXPECT_EQ(phi.threshold(pooled, -std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_EQ(phi.threshold(pooled, pooled), 2.0);
  EXPECT_EQ(phi.threshold(0.0, -std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_EQ(phi.threshold(3.0, 0.0), std::numeric_limits<double>::infinity());
}

TEST(VirtualValuesProperty, IronedNonDecreasingAndMatchesRawOffFlats) {
  std::mt19937_64 rng(29);
  std::vector<Dist> dists{Dist::uniform(0.0, 1.0, 300), Dist::exponential(1.0, 300), fixtures::f_disc(),
                          consistent_iid(AmbiguitySpec(4, 2, Dist::uniform(0.0, 1.0, 300)))};
  for (int t = 0; t < 20; ++t) dists.push_back(fixtures::random_table(rng, 7, t % 3));
  for (const auto& d : dists) {
    const auto phi = virtual_values(d);
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 5000; ++i) {
      const double v = d.support_lo() + (d.support_hi() - d.support_lo()) * i / 5000.0;
      const double w = phi.ironed(v);
      EXPECT_GE(w, prev) << d.label() << " at " << v;
      prev = w;
      bool flat = false;
      for (const auto& r : phi.flat_regions()) flat = flat || (v >= r.lo && v <= r.hi);
      if (!flat) {
        EXPECT_NEAR(w, phi.raw(v), 1e-9) << d.label() << " at " << v;
      }
    }
  }
}

TEST(MonopolyPrice, Examples) {
  auto [p, r] = monopoly_price(Dist::uniform(0.0, 1.0));
  EXPECT_NEAR(p, 0.5, 1e-9);
  EXPECT_NEAR(r, 0.25, 1e-12);
  std::tie(p, r) = monopoly_price(fixtures::f_disc());
  EXPECT_EQ(p, 1.0);
  EXPECT_DOUBLE_EQ(r, 1.0);
  std::tie(p, r) = monopoly_price(Dist::point_mass(2.5));
  EXPECT_EQ(p, 2.5);
  EXPECT_EQ(r, 2.5);
}

TEST(MonopolyPrice, TiesGoToSmallerPrice) {
  // 1 * 1 = 2 * 0.5.
  const auto [p, r] = monopoly_price(Dist::two_point(1.0, 0.5, 2.0));
  EXPECT_EQ(p, 1.0);
  EXPECT_DOUBLE_EQ(r, 1.0);
}

TEST(MonopolyPriceProperty, MatchesGridSearch) {
  std::mt19937_64 rng(31);
  std::vector<Dist> dists{Dist::uniform(0.0, 1.0), Dist::exponential(1.0, 200), Dist::beta(2.0, 2.0, 200)};
  for (int t = 0; t < 20; ++t) dists.push_back(fixtures::random_table(rng, 6, t % 3));
  for (const auto& d : dists) {
    double grid_best = 0.0;
    for (double p = 0.0; p <= d.support_hi() + 1e-4; p += 1e-4) grid_best = std::max(grid_best, p * d.survival_ge(p));
    for (const auto& pt : d.points()) grid_best = std::max(grid_best, pt.value * d.survival_ge(pt.value));
    const auto [p, r] = monopoly_price(d);
    EXPECT_NEAR(r, grid_best, 1e-6) << d.label();
    EXPECT_GE(r, grid_best - 1e-12);
    EXPECT_NEAR(r, p * d.survival_ge(p), 1e-12);
  }
}

TEST(Regularity, Uniform) {
  const auto rep = is_regular_above_reserve(Dist::uniform(0.0, 1.0));
  EXPECT_TRUE(rep.regular_above_reserve);
  EXPECT_TRUE(rep.regular);
}

TEST(Regularity, TwoPointPooledAcrossReserveIsNotRegularAboveIt) {
  // Reserve 1 sells with probability one; the pooled interval (0.2, 1)
  // covers every quantile below it.
  const auto rep = is_regular_above_reserve(fixtures::f_disc());
  EXPECT_EQ(rep.reserve, 1.0);
  EXPECT_DOUBLE_EQ(rep.reserve_quantile, 1.0);
  EXPECT_FALSE(rep.regular_above_reserve);
  ASSERT_EQ(rep.violating.size(), 1u);
  EXPECT_NEAR(rep.violating[0].lo, 0.2, 1e-15);
}

TEST(Regularity, ConsistentIidOfUniformIsRegularOnlyAboveReserve) {
  const Dist fbar = consistent_iid(AmbiguitySpec(4, 2, Dist::uniform(0.0, 1.0)));
  const auto rep = is_regular_above_reserve(fbar);
  EXPECT_TRUE(rep.regular_above_reserve);
  EXPECT_FALSE(rep.regular);
  EXPECT_GT(rep.max_gap, 1e-6);
}

TEST(Regularity, BernoulliConsistentIid) {
  // Ironing starts exactly at the reserve quantile.
  const Dist fbar = consistent_iid(AmbiguitySpec(3, 2, fixtures::bernoulli(0.5)));
  const auto rep = is_regular_above_reserve(fbar);
  EXPECT_EQ(rep.reserve, 1.0);
  EXPECT_TRUE(rep.regular_above_reserve);
}
