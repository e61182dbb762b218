#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace robust_auction {

/// Default number of knots used when importing a continuous family.
inline constexpr std::size_t kDefaultGrid = 4096;

/// Upper-tail mass discarded when truncating an unbounded family.
inline constexpr double kTailMass = 1e-8;

/// Slack used when validating probabilities supplied by callers.
inline constexpr double kProbabilityTolerance = 1e-12;

struct Atom {
  double value;
  double mass;
};

struct Knot {
  double value;
  double cdf;
};

/// One-dimensional value distribution on a bounded, non-negative support.
///
/// The distribution is stored as a strictly increasing list of points. Each
/// point carries the left limit F(v-) and the right-continuous value F(v); the
/// difference is the atom at v. Between consecutive points the CDF is linear
/// from F(v_i) to F(v_{i+1}-). Every value distribution in the library,
/// including imported continuous families, uses this representation so that
/// order statistics and revenue integrals are exact on it.
class Dist {
 public:
  struct Point {
    double value;
    double cdf_left;
    double cdf;
  };

  static Dist from_points(std::vector<Point> points, std::string label = "table") {
    if (points.empty()) throw std::invalid_argument("Dist: no points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!std::isfinite(p.value) || !std::isfinite(p.cdf) || !std::isfinite(p.cdf_left)) {
        throw std::invalid_argument("Dist: non-finite point");
      }
      if (i > 0 && !(p.value > points[i - 1].value)) {
        throw std::invalid_argument("Dist: point values must be strictly increasing");
      }
    }
    if (points.front().value < 0.0) {
      throw std::invalid_argument("Dist: negative support is not allowed for bidder values");
    }
    if (std::abs(points.front().cdf_left) > kProbabilityTolerance) {
      throw std::invalid_argument("Dist: CDF must vanish below the support");
    }
    if (std::abs(points.back().cdf - 1.0) > kProbabilityTolerance) {
      throw std::invalid_argument("Dist: CDF must reach 1 at the top of the support");
    }
    double running = 0.0;
    for (auto& p : points) {
      if (p.cdf_left < running - kProbabilityTolerance || p.cdf < p.cdf_left - kProbabilityTolerance) {
        throw std::invalid_argument("Dist: CDF must be non-decreasing");
      }
      p.cdf_left = std::clamp(std::max(p.cdf_left, running), 0.0, 1.0);
      p.cdf = std::clamp(std::max(p.cdf, p.cdf_left), 0.0, 1.0);
      running = p.cdf;
    }
    points.front().cdf_left = 0.0;
    points.back().cdf = 1.0;
    Dist d;
    d.points_ = std::move(points);
    d.label_ = std::move(label);
    return d;
  }

  static Dist point_mass(double value) {
    return from_points({{value, 0.0, 1.0}}, "atom(" + fmt(value) + ")");
  }

  /// Finite-support distribution. Duplicate values are merged and zero masses dropped.
  static Dist discrete(std::vector<Atom> atoms, std::string label = "discrete") {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    std::vector<Atom> merged;
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!(a.mass >= 0.0)) throw std::invalid_argument("Dist: atom masses must be non-negative");
      total += a.mass;
      if (a.mass == 0.0) continue;
      if (!merged.empty() && merged.back().value == a.value) {
        merged.back().mass += a.mass;
      } else {
        merged.push_back(a);
      }
    }
    if (merged.empty() || std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("Dist: atom masses must sum to 1");
    }
    std::vector<Point> pts;
    double acc = 0.0;
    for (const auto& a : merged) {
      const double left = acc;
      acc += a.mass / total;
      pts.push_back({a.value, left, acc});
    }
    pts.back().cdf = 1.0;
    return from_points(std::move(pts), std::move(label));
  }

  /// v1 with probability p1, v2 otherwise.
  static Dist two_point(double v1, double p1, double v2) {
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("Dist: two_point probability outside [0,1]");
    return discrete({{v1, p1}, {v2, 1.0 - p1}},
                    "twopoint(" + fmt(v1) + "," + fmt(p1) + "," + fmt(v2) + ")");
  }

  /// Samples a continuous CDF on an equispaced grid over [lo, hi] and
  /// renormalises so that the truncated mass is spread proportionally.
  static Dist from_cdf(const std::function<double(double)>& cdf, double lo, double hi,
                       std::size_t grid = kDefaultGrid, std::string label = "cdf") {
    if (grid < 2) throw std::invalid_argument("Dist: grid needs at least two knots");
    if (!(hi > lo)) throw std::invalid_argument("Dist: empty support");
    const double f_lo = cdf(lo);
    const double f_hi = cdf(hi);
    if (!(f_hi > f_lo)) throw std::invalid_argument("Dist: CDF carries no mass on the support");
    std::vector<Point> pts(grid);
    double running = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
      const double v = i + 1 == grid ? hi : lo + (hi - lo) * static_cast<double>(i) / (grid - 1);
      double f = (cdf(v) - f_lo) / (f_hi - f_lo);
      f = std::clamp(std::max(f, running), 0.0, 1.0);
      running = f;
      pts[i] = {v, f, f};
    }
    pts.front() = {lo, 0.0, 0.0};
    pts.back() = {hi, 1.0, 1.0};
    return from_points(std::move(pts), std::move(label));
  }

  static Dist uniform(double lo, double hi, std::size_t grid = kDefaultGrid) {
    return from_cdf([lo, hi](double v) { return (v - lo) / (hi - lo); }, lo, hi, grid,
                    "uniform(" + fmt(lo) + "," + fmt(hi) + ")");
  }

  /// Truncated where the upper tail mass drops to `tail_mass`.
  static Dist exponential(double rate, std::size_t grid = kDefaultGrid, double tail_mass = kTailMass) {
    if (!(rate > 0.0)) throw std::invalid_argument("Dist: exponential rate must be positive");
    if (!(tail_mass > 0.0 && tail_mass < 1.0)) throw std::invalid_argument("Dist: tail mass outside (0,1)");
    const double hi = -std::log(tail_mass) / rate;
    return from_cdf([rate](double v) { return -std::expm1(-rate * v); }, 0.0, hi, grid,
                    "exponential(" + fmt(rate) + ")");
  }

  static Dist beta(double a, double b, std::size_t grid = kDefaultGrid) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("Dist: beta shape parameters must be positive");
    return from_cdf([a, b](double v) { return boost::math::ibeta(a, b, std::clamp(v, 0.0, 1.0)); }, 0.0, 1.0,
                    grid, "beta(" + fmt(a) + "," + fmt(b) + ")");
  }

  /// Normal truncated to mean +- 8 sd, with the floor clipped at zero.
  static Dist normal(double mean, double sd, std::size_t grid = kDefaultGrid) {
    if (!(sd > 0.0)) throw std::invalid_argument("Dist: normal sd must be positive");
    const double lo = std::max(0.0, mean - 8.0 * sd);
    const double hi = mean + 8.0 * sd;
    if (!(hi > 0.0)) throw std::invalid_argument("Dist: normal has no mass above zero");
    return from_cdf([mean, sd](double v) { return 0.5 * std::erfc(-(v - mean) / (sd * std::numbers::sqrt2)); },
                    lo, hi, grid, "normal(" + fmt(mean) + "," + fmt(sd) + ")");
  }

  /// Explicit table: `continuous` lists knots of the continuous part of the
  /// CDF (starting at 0, linear in between, ending at the continuous mass)
  /// and `atoms` carries the remaining mass.
  static Dist from_table(std::vector<Knot> continuous, std::vector<Atom> atoms) {
    for (std::size_t i = 1; i < continuous.size(); ++i) {
      if (!(continuous[i].value > continuous[i - 1].value) || continuous[i].cdf < continuous[i - 1].cdf) {
        throw std::invalid_argument("Dist: table knots must be increasing");
      }
    }
    if (!continuous.empty() && std::abs(continuous.front().cdf) > kProbabilityTolerance) {
      throw std::invalid_argument("Dist: table continuous part must start at 0");
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    const double cont_mass = continuous.empty() ? 0.0 : continuous.back().cdf;
    double atom_mass = 0.0;
    for (const auto& a : atoms) {
      if (!(a.mass > 0.0)) throw std::invalid_argument("Dist: table atom masses must be positive");
      atom_mass += a.mass;
    }
    if (std::abs(cont_mass + atom_mass - 1.0) > 1e-9) {
      throw std::invalid_argument("Dist: table masses must sum to 1");
    }
    auto cont_at = [&](double v) {
      if (continuous.empty() || v <= continuous.front().value) return 0.0;
      if (v >= continuous.back().value) return cont_mass;
      auto it = std::upper_bound(continuous.begin(), continuous.end(), v,
                                 [](double x, const Knot& k) { return x < k.value; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      return lo.cdf + (hi.cdf - lo.cdf) * (v - lo.value) / (hi.value - lo.value);
    };
    std::vector<double> values;
    for (const auto& k : continuous) values.push_back(k.value);
    for (const auto& a : atoms) values.push_back(a.value);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<Point> pts;
    for (double v : values) {
      double below = 0.0;
      double upto = 0.0;
      for (const auto& a : atoms) {
        if (a.value < v) below += a.mass;
        if (a.value <= v) upto += a.mass;
      }
      const double c = cont_at(v);
      pts.push_back({v, (c + below) / (cont_mass + atom_mass), (c + upto) / (cont_mass + atom_mass)});
    }
    pts.back().cdf = 1.0;
    return from_points(std::move(pts), "table");
  }

  /// Same distribution with extra representation points at `values`
  /// (interpolated, so the CDF is unchanged).
  Dist refined(std::span<const double> values) const {
    std::vector<double> grid;
    for (const auto& p : points_) grid.push_back(p.value);
    grid.insert(grid.end(), values.begin(), values.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<Point> pts;
    for (double v : grid) {
      if (v < 0.0) throw std::invalid_argument("Dist::refined: negative value");
      pts.push_back({v, cdf_left(v), cdf(v)});
    }
    return from_points(std::move(pts), label_);
  }

  /// Right-continuous CDF, Pr(X <= v).
  double cdf(double v) const {
    if (v < points_.front().value) return 0.0;
    if (v >= points_.back().value) return 1.0;
    auto it = std::upper_bound(points_.begin(), points_.end(), v,
                               [](double x, const Point& p) { return x < p.value; });
    const Point& lo = *(it - 1);
    if (lo.value == v) return lo.cdf;
    return interpolate(lo, *it, v);
  }

  /// Left limit, Pr(X < v).
  double cdf_left(double v) const {
    if (v <= points_.front().value) return 0.0;
    if (v > points_.back().value) return 1.0;
    auto it = std::lower_bound(points_.begin(), points_.end(), v,
                               [](const Point& p, double x) { return p.value < x; });
    if (it->value == v) return it->cdf_left;
    return interpolate(*(it - 1), *it, v);
  }

  /// Pr(X >= v).
  double survival_ge(double v) const { return 1.0 - cdf_left(v); }

  /// Generalised inverse inf{v : F(v) >= q}; q = 0 maps to the bottom of the support.
  double quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("Dist::quantile: q outside [0,1]");
    auto it = std::lower_bound(points_.begin(), points_.end(), q,
                               [](const Point& p, double x) { return p.cdf < x; });
    if (it == points_.end()) it = points_.end() - 1;
    if (it == points_.begin()) return it->value;
    const Point& lo = *(it - 1);
    if (q <= it->cdf_left && it->cdf_left > lo.cdf) {
      const double t = (q - lo.cdf) / (it->cdf_left - lo.cdf);
      return lo.value + std::clamp(t, 0.0, 1.0) * (it->value - lo.value);
    }
    return it->value;
  }

  /// Inverse-transform sample for a uniform draw u.
  double sample(double u) const { return quantile(std::clamp(u, 0.0, 1.0)); }

  double support_lo() const { return points_.front().value; }
  double support_hi() const { return points_.back().value; }
  const std::vector<Point>& points() const { return points_; }
  const std::string& label() const { return label_; }

  std::vector<Knot> knots() const {
    std::vector<Knot> out;
    out.reserve(points_.size());
    for (const auto& p : points_) out.push_back({p.value, p.cdf});
    return out;
  }

  std::vector<Atom> atoms() const {
    std::vector<Atom> out;
    for (const auto& p : points_) {
      if (p.cdf > p.cdf_left) out.push_back({p.value, p.cdf - p.cdf_left});
    }
    return out;
  }

  /// True when all mass sits on atoms.
  bool is_discrete() const {
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      if (points_[i + 1].cdf_left > points_[i].cdf) return false;
    }
    return true;
  }

  double continuous_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) m += points_[i + 1].cdf_left - points_[i].cdf;
    return m;
  }

  /// E[X], exact on the representation.
  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      m += points_[i].value * (points_[i].cdf - points_[i].cdf_left);
      if (i + 1 < points_.size()) {
        const double mass = points_[i + 1].cdf_left - points_[i].cdf;
        m += mass * 0.5 * (points_[i].value + points_[i + 1].value);
      }
    }
    return m;
  }

  static std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
  }

 private:
  Dist() = default;

  static double interpolate(const Point& lo, const Point& hi, double v) {
    const double t = (v - lo.value) / (hi.value - lo.value);
    return lo.cdf + t * (hi.cdf_left - lo.cdf);
  }

  std::vector<Point> points_;
  std::string label_;
};

/// Sorted union of the point values of several distributions.
inline std::vector<double> merged_grid(std::span<const Dist> dists) {
  std::vector<double> grid;
  for (const auto& d : dists) {
    for (const auto& p : d.points()) grid.push_back(p.value);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

/// Replaces the survival functions of a pair by their geometric mean:
/// 1 - F = sqrt((1 - F1)(1 - F2)) at every point of the merged grid.
inline Dist geometric_average(const Dist& d1, const Dist& d2) {
  const std::vector<Dist> both{d1, d2};
  const auto grid = merged_grid(both);
  std::vector<Dist::Point> pts;
  pts.reserve(grid.size());
  for (double v : grid) {
    const double s_left = std::sqrt((1.0 - d1.cdf_left(v)) * (1.0 - d2.cdf_left(v)));
    const double s = std::sqrt((1.0 - d1.cdf(v)) * (1.0 - d2.cdf(v)));
    pts.push_back({v, 1.0 - s_left, 1.0 - s});
  }
  return Dist::from_points(std::move(pts), "geomavg");
}

}  // namespace robust_auction
