#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace robust_auction::numeric {

/// Root of a non-decreasing function on [lo, hi] by plain bisection.
///
/// Returns x with f(x) as close to target as the bracket allows. The loop
/// stops once the bracket collapses to adjacent doubles, so `tolerance` only
/// acts as an early exit on |f(x) - target|.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi, double tolerance = 0.0,
                         int max_iter = 2000) {
  if (!(lo <= hi)) throw std::invalid_argument("bisect_increasing: empty bracket");
  if (f(lo) >= target) return lo;
  if (f(hi) <= target) return hi;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (tolerance > 0.0 && std::abs(fm - target) <= tolerance) return mid;
    if (fm < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(f(lo) - target) <= std::abs(f(hi) - target) ? lo : hi;
}

/// Golden-section search for a maximum of f on [a, b]. Returns (argmax, max).
template <class F>
std::pair<double, double> golden_section_max(F&& f, double a, double b, double x_tolerance) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > x_tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (c >= d) break;
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

struct QuadratureRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

namespace detail {

inline QuadratureRule make_gauss_legendre(int m) {
  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    // Newton on P_m starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= m; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (m == 1) {
      x = 0.0;
      dp = 1.0;
    }
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.weights[i] = m == 1 ? 1.0 : 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace detail

/// m-point Gauss-Legendre rule on [0, 1]; exact for polynomials of degree 2m - 1.
inline const QuadratureRule& gauss_legendre(int m) {
  constexpr int kMax = 64;
  static const std::array<QuadratureRule, kMax + 1> table = [] {
    std::array<QuadratureRule, kMax + 1> t{};
    for (int i = 1; i <= kMax; ++i) t[i] = detail::make_gauss_legendre(i);
    return t;
  }();
  if (m < 1 || m > kMax) throw std::invalid_argument("gauss_legendre: unsupported order");
  return table[m];
}

}  // namespace robust_auction::numeric
