#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "robust_auction/dist.hpp"

namespace robust_auction {

struct CurvePoint {
  double quantile;  // Pr(value >= price)
  double revenue;   // quantile * price
  double price;
};

struct QuantileInterval {
  double lo;
  double hi;
};

struct ValueInterval {
  double lo;
  double hi;
};

/// Revenue curve r(q) = q * F^{-1}(1 - q) sampled at every representation
/// breakpoint, with both sides of each jump, together with its upper
/// concave envelope.
///
/// Between consecutive knots the curve is taken to be the straight chord;
/// on atoms this is exact, and on a continuous segment the chord slope equals
/// the density virtual value at the segment midpoint.
struct RevenueCurve {
  std::vector<CurvePoint> knots;
  std::vector<std::size_t> hull;        // knot indices of the envelope vertices
  std::vector<double> edge_gap;         // max (envelope - curve) under each hull edge
  std::vector<QuantileInterval> ironed_intervals;

  std::vector<CurvePoint> ironed_knots() const {
    std::vector<CurvePoint> out;
    out.reserve(hull.size());
    for (auto i : hull) out.push_back(knots[i]);
    return out;
  }

  double edge_slope(std::size_t e) const {
    const auto& a = knots[hull[e]];
    const auto& b = knots[hull[e + 1]];
    return (b.revenue - a.revenue) / (b.quantile - a.quantile);
  }

  /// Envelope value at quantile q.
  double ironed_revenue(double q) const {
    if (hull.size() == 1) return knots[hull[0]].revenue;
    std::size_t e = edge_containing(q);
    const auto& a = knots[hull[e]];
    const auto& b = knots[hull[e + 1]];
    const double t = (q - a.quantile) / (b.quantile - a.quantile);
    return a.revenue + t * (b.revenue - a.revenue);
  }

  /// Index of the hull edge whose quantile range contains q.
  std::size_t edge_containing(double q) const {
    std::size_t lo = 0;
    std::size_t hi = hull.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (knots[hull[mid]].quantile <= q) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  /// Largest envelope-minus-curve gap over knots with index in [first, last].
  double max_gap(std::size_t first, std::size_t last) const {
    double gap = 0.0;
    for (std::size_t i = first; i <= last && i < knots.size(); ++i) {
      gap = std::max(gap, envelope_at_knot(i) - knots[i].revenue);
    }
    return gap;
  }

  /// Envelope evaluated at knot i; for the lower side of a jump this is the
  /// envelope value at the same quantile.
  double envelope_at_knot(std::size_t i) const {
    auto it = std::upper_bound(hull.begin(), hull.end(), i);
    if (it == hull.begin()) return knots[i].revenue;
    const std::size_t a = *(it - 1);
    if (a == i || it == hull.end()) return a == i ? knots[i].revenue : knots[a].revenue;
    const std::size_t b = *it;
    const auto& pa = knots[a];
    const auto& pb = knots[b];
    const double t = (knots[i].quantile - pa.quantile) / (pb.quantile - pa.quantile);
    return pa.revenue + t * (pb.revenue - pa.revenue);
  }

  double scale() const {
    double m = 1.0;
    for (const auto& k : knots) m = std::max(m, std::abs(k.revenue));
    return m;
  }
};

namespace detail {

inline double cross(const CurvePoint& o, const CurvePoint& a, const CurvePoint& b) {
  return (a.quantile - o.quantile) * (b.revenue - o.revenue) - (a.revenue - o.revenue) * (b.quantile - o.quantile);
}

}  // namespace detail

/// Gap above which a hull edge counts as an ironing interval, relative to the curve scale.
inline constexpr double kIroningTolerance = 1e-12;

/// Upper concave envelope of the curve knots (monotone chain, collinear
/// vertices dropped) and the quantile intervals where it strictly exceeds
/// the curve.
inline RevenueCurve iron(RevenueCurve c) {
  if (c.knots.empty()) throw std::invalid_argument("iron: empty curve");
  c.hull.clear();
  for (std::size_t i = 0; i < c.knots.size(); ++i) {
    const auto& p = c.knots[i];
    if (!c.hull.empty() && c.knots[c.hull.back()].quantile == p.quantile) {
      if (p.revenue <= c.knots[c.hull.back()].revenue) continue;
      c.hull.pop_back();
    }
    while (c.hull.size() >= 2 &&
           detail::cross(c.knots[c.hull[c.hull.size() - 2]], c.knots[c.hull.back()], p) >= 0.0) {
      c.hull.pop_back();
    }
    c.hull.push_back(i);
  }
  c.edge_gap.assign(c.hull.empty() ? 0 : c.hull.size() - 1, 0.0);
  c.ironed_intervals.clear();
  const double tol = kIroningTolerance * c.scale();
  for (std::size_t e = 0; e + 1 < c.hull.size(); ++e) {
    const std::size_t a = c.hull[e];
    const std::size_t b = c.hull[e + 1];
    if (b > a + 1) c.edge_gap[e] = c.max_gap(a + 1, b - 1);
    if (c.edge_gap[e] > tol) {
      c.ironed_intervals.push_back({c.knots[a].quantile, c.knots[b].quantile});
    }
  }
  return c;
}

/// Revenue curve of d, ironed.
inline RevenueCurve revenue_curve(const Dist& d) {
  if (d.support_lo() < 0.0) throw std::domain_error("revenue_curve: negative support");
  RevenueCurve c;
  const auto& pts = d.points();
  auto push = [&](double q, double price) {
    q = std::clamp(q, 0.0, 1.0);
    CurvePoint p{q, q * price, price};
    if (!c.knots.empty()) {
      const auto& last = c.knots.back();
      if (last.quantile == p.quantile && last.revenue == p.revenue) return;
    }
    c.knots.push_back(p);
  };
  for (std::size_t i = pts.size(); i-- > 0;) {
    push(1.0 - pts[i].cdf, pts[i].value);
    push(1.0 - pts[i].cdf_left, pts[i].value);
  }
  return iron(std::move(c));
}

/// Monopoly price argmax_p p * Pr(X >= p) and its revenue. Candidates are the
/// representation points plus the stationary point of each linear CDF
/// segment; ties go to the smaller price.
inline std::pair<double, double> monopoly_price(const Dist& d) {
  if (d.support_lo() < 0.0) throw std::domain_error("monopoly_price: negative support");
  const auto& pts = d.points();
  double best_p = pts.front().value;
  double best_r = -1.0;
  auto consider = [&](double p, double r) {
    if (r > best_r + 1e-12 * std::max(1.0, std::abs(best_r))) {
      best_p = p;
      best_r = r;
    }
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    consider(pts[i].value, pts[i].value * (1.0 - pts[i].cdf_left));
    if (i + 1 < pts.size()) {
      const double a = pts[i].value;
      const double b = pts[i + 1].value;
      const double fa = pts[i].cdf;
      const double slope = (pts[i + 1].cdf_left - fa) / (b - a);
      if (slope > 0.0) {
        const double p = (1.0 - fa + slope * a) / (2.0 * slope);
        if (p > a && p < b) consider(p, p * (1.0 - (fa + slope * (p - a))));
      }
    }
  }
  return {best_p, std::max(best_r, 0.0)};
}

/// Raw and ironed virtual values as step functions of the value.
///
/// Each step covers the values of one curve segment: an atom is a single
/// value, a continuous segment an interval. Values in gaps of the support take
/// the level of the nearest step below; values below the support have level
/// -infinity so they never win.
class VirtualValueFn {
 public:
  struct Step {
    double start;
    double end;
    bool atom;
    bool inclusive;  // whether `start` itself belongs to this step
    double raw;
    double ironed;
  };

  explicit VirtualValueFn(const RevenueCurve& curve) {
    const auto& k = curve.knots;
    std::vector<Step> desc;
    std::size_t e = 0;
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
      const auto& a = k[j];
      const auto& b = k[j + 1];
      if (!(b.quantile > a.quantile)) continue;
      while (e + 2 < curve.hull.size() && k[curve.hull[e + 1]].quantile <= a.quantile) ++e;
      const double raw = (b.revenue - a.revenue) / (b.quantile - a.quantile);
      const double ironed = curve.hull.size() >= 2 ? curve.edge_slope(e) : raw;
      desc.push_back({b.price, a.price, a.price == b.price, true, raw, ironed});
    }
    steps_.assign(desc.rbegin(), desc.rend());
    for (std::size_t i = 1; i < steps_.size(); ++i) {
      if (steps_[i - 1].atom && steps_[i - 1].start == steps_[i].start) steps_[i].inclusive = false;
      // hull slopes can wobble by an ulp across collinear edges
      steps_[i].ironed = std::max(steps_[i].ironed, steps_[i - 1].ironed);
    }
    for (std::size_t e2 = 0; e2 + 1 < curve.hull.size(); ++e2) {
      if (curve.edge_gap[e2] > kIroningTolerance * curve.scale()) {
        flat_.push_back({k[curve.hull[e2 + 1]].price, k[curve.hull[e2]].price});
      }
    }
    std::reverse(flat_.begin(), flat_.end());
  }

  explicit VirtualValueFn(const Dist& d) : VirtualValueFn(revenue_curve(d)) {}

  double ironed(double v) const {
    const Step* s = find(v);
    return s ? s->ironed : -std::numeric_limits<double>::infinity();
  }

  double raw(double v) const {
    const Step* s = find(v);
    return s ? s->raw : -std::numeric_limits<double>::infinity();
  }

  /// inf{v : ironed(v) >= at_least and ironed(v) > above}; +infinity if none.
  double threshold(double at_least, double above) const {
    auto it = std::partition_point(steps_.begin(), steps_.end(), [&](const Step& s) {
      return !(s.ironed >= at_least && s.ironed > above);
    });
    return it == steps_.end() ? std::numeric_limits<double>::infinity() : it->start;
  }

  const std::vector<Step>& steps() const { return steps_; }

  /// Value intervals on which the ironed virtual value is pooled.
  const std::vector<ValueInterval>& flat_regions() const { return flat_; }

 private:
  const Step* find(double v) const {
    auto it = std::partition_point(steps_.begin(), steps_.end(), [v](const Step& s) {
      return s.start < v || (s.start == v && s.inclusive);
    });
    if (it == steps_.begin()) return nullptr;
    return &*(it - 1);
  }

  std::vector<Step> steps_;
  std::vector<ValueInterval> flat_;
};

inline VirtualValueFn virtual_values(const Dist& d) {
  if (d.support_lo() < 0.0) throw std::domain_error("virtual_values: negative support");
  return VirtualValueFn(d);
}

struct RegularityReport {
  bool regular_above_reserve = false;
  bool regular = false;
  double reserve = 0.0;
  double reserve_quantile = 0.0;
  double max_gap_above_reserve = 0.0;
  double max_gap = 0.0;
  std::vector<QuantileInterval> violating;  // ironing intervals at or above the reserve
};

/// Default gap tolerance for the regularity diagnostics.
inline constexpr double kRegularityTolerance = 1e-9;

/// Regular above the reserve iff no ironing interval reaches quantiles below
/// the reserve quantile Pr(X >= p*). Full regularity requires no ironing at all.
inline RegularityReport is_regular_above_reserve(const Dist& d, double tolerance = kRegularityTolerance) {
  const RevenueCurve curve = revenue_curve(d);
  RegularityReport rep;
  std::tie(rep.reserve, std::ignore) = monopoly_price(d);
  rep.reserve_quantile = d.survival_ge(rep.reserve);
  for (std::size_t e = 0; e + 1 < curve.hull.size(); ++e) {
    const double gap = curve.edge_gap[e];
    rep.max_gap = std::max(rep.max_gap, gap);
    const double q_lo = curve.knots[curve.hull[e]].quantile;
    if (q_lo < rep.reserve_quantile - 1e-12) {
      rep.max_gap_above_reserve = std::max(rep.max_gap_above_reserve, gap);
      if (gap > tolerance) rep.violating.push_back({q_lo, curve.knots[curve.hull[e + 1]].quantile});
    }
  }
  rep.regular_above_reserve = rep.violating.empty();
  rep.regular = rep.max_gap <= tolerance;
  return rep;
}

}  // namespace robust_auction
