#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "robust_auction/dist.hpp"
#include "robust_auction/numeric.hpp"

namespace robust_auction {

/// pmf of the number of successes among independent Bernoulli(x_j) trials.
inline std::vector<double> poisson_binomial_pmf(std::span<const double> x) {
  std::vector<double> pmf(x.size() + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double p = x[j];
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("poisson_binomial_pmf: probability outside [0,1]");
    for (std::size_t t = j + 1; t > 0; --t) pmf[t] = pmf[t] * (1.0 - p) + pmf[t - 1] * p;
    pmf[0] *= 1.0 - p;
  }
  return pmf;
}

inline void check_order_index(int n, int k) {
  if (n < 1) throw std::invalid_argument("order statistic: need at least one bidder");
  if (k < 1 || k > n) throw std::out_of_range("order statistic: index outside [1, n]");
}

/// H_{n,k}(u) = Pr(Bin(n, 1 - u) <= k - 1): the CDF of the k-th highest of n
/// i.i.d. draws whose common CDF value is u.
inline double h_poly(int n, int k, double u) {
  check_order_index(n, k);
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("h_poly: u outside [0,1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  const double s = 1.0 - u;
  if (u > 0.5) {
    // Sum the small upper tail Pr(Bin(n, s) >= k) instead, from t = n down.
    double term = std::pow(s, n);
    double tail = term;
    for (int t = n; t > k; --t) {
      term *= static_cast<double>(t) / (n - t + 1) * (u / s);
      tail += term;
    }
    return std::max(0.0, 1.0 - tail);
  }
  // Binomial pmf by the multiplicative recurrence from t = 0.
  double term = std::pow(u, n);
  double sum = term;
  for (int t = 1; t < k; ++t) {
    term *= static_cast<double>(n - t + 1) / t * (s / u);
    sum += term;
  }
  return std::min(sum, 1.0);
}

/// Inverse of h_poly in u, by bisection until the bracket collapses.
inline double h_inverse(int n, int k, double g) {
  check_order_index(n, k);
  if (!(g >= 0.0 && g <= 1.0)) throw std::domain_error("h_inverse: g outside [0,1]");
  if (g == 0.0) return 0.0;
  if (g == 1.0) return 1.0;
  if (k == 1) return std::pow(g, 1.0 / n);
  return numeric::bisect_increasing([&](double u) { return h_poly(n, k, u); }, g, 0.0, 1.0);
}

/// Pi_k(G): product distributions over n bidders whose k-th highest value is distributed as G.
struct AmbiguitySpec {
  int n;
  int k;
  Dist G;

  AmbiguitySpec(int n_, int k_, Dist g) : n(n_), k(k_), G(std::move(g)) { check_order_index(n, k); }
};

/// Independent bidders, one component per bidder.
class ProductDist {
 public:
  explicit ProductDist(std::vector<Dist> components) : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("ProductDist: need at least one component");
  }

  static ProductDist iid(const Dist& d, int n) {
    if (n < 1) throw std::invalid_argument("ProductDist: need at least one component");
    return ProductDist(std::vector<Dist>(static_cast<std::size_t>(n), d));
  }

  int size() const { return static_cast<int>(components_.size()); }
  const Dist& operator[](std::size_t i) const { return components_[i]; }
  const std::vector<Dist>& components() const { return components_; }
  std::vector<double> grid() const { return merged_grid(components_); }

  std::string label() const {
    bool same = true;
    for (const auto& c : components_) same = same && c.label() == components_.front().label();
    if (same) return components_.front().label() + "^" + std::to_string(components_.size());
    std::string s;
    for (std::size_t i = 0; i < components_.size(); ++i) s += (i ? " x " : "") + components_[i].label();
    return s;
  }

 private:
  std::vector<Dist> components_;
};

/// Consistent i.i.d. distribution: the unique F with Phi_k(F^n) = G, obtained
/// by pushing both limits of G at every point through h_inverse.
inline Dist consistent_iid(const AmbiguitySpec& spec) {
  std::vector<Dist::Point> pts;
  pts.reserve(spec.G.points().size());
  for (const auto& p : spec.G.points()) {
    pts.push_back({p.value, h_inverse(spec.n, spec.k, p.cdf_left), h_inverse(spec.n, spec.k, p.cdf)});
  }
  return Dist::from_points(std::move(pts), "consistent_iid(n=" + std::to_string(spec.n) +
                                               ",k=" + std::to_string(spec.k) + "," + spec.G.label() + ")");
}

namespace detail {

inline double count_at_most(std::span<const double> x, int m) {
  const auto pmf = poisson_binomial_pmf(x);
  double s = 0.0;
  for (int t = 0; t <= m && t < static_cast<int>(pmf.size()); ++t) s += pmf[t];
  return std::min(s, 1.0);
}

}  // namespace detail

/// Pr(v_(i) <= v) = Pr(#{j : v_j > v} <= i - 1).
inline double order_stat_cdf(const ProductDist& pd, int i, double v) {
  check_order_index(pd.size(), i);
  std::vector<double> x;
  for (const auto& d : pd.components()) x.push_back(1.0 - d.cdf(v));
  return detail::count_at_most(x, i - 1);
}

/// Pr(v_(i) < v).
inline double order_stat_cdf_left(const ProductDist& pd, int i, double v) {
  check_order_index(pd.size(), i);
  std::vector<double> x;
  for (const auto& d : pd.components()) x.push_back(d.survival_ge(v));
  return detail::count_at_most(x, i - 1);
}

/// Marginal of v_(i) as a Dist on the merged component grid. Exact at the
/// grid points; linear in between.
inline Dist order_stat_dist(const ProductDist& pd, int i) {
  check_order_index(pd.size(), i);
  std::vector<Dist::Point> pts;
  for (double v : pd.grid()) pts.push_back({v, order_stat_cdf_left(pd, i, v), order_stat_cdf(pd, i, v)});
  return Dist::from_points(std::move(pts), "orderstat(" + std::to_string(i) + "," + pd.label() + ")");
}

/// True iff d1 first-order stochastically dominates d2 (F1 <= F2 on the merged grid, both limits).
inline bool fosd_check(const Dist& d1, const Dist& d2, double tolerance = kProbabilityTolerance) {
  const std::vector<Dist> both{d1, d2};
  for (double v : merged_grid(both)) {
    if (d1.cdf(v) > d2.cdf(v) + tolerance) return false;
    if (d1.cdf_left(v) > d2.cdf_left(v) + tolerance) return false;
  }
  return true;
}

/// Stochastically smallest distribution of v_(i) over Pi_k(G): the i-th order
/// statistic of the consistent i.i.d. profile for i <= k, and the point mass
/// at zero for i > k.
inline Dist minimal_orderstat_cdf(const AmbiguitySpec& spec, int i) {
  check_order_index(spec.n, i);
  if (i > spec.k) return Dist::point_mass(0.0);
  if (i == spec.k) return spec.G;
  return order_stat_dist(ProductDist::iid(consistent_iid(spec), spec.n), i);
}

/// Limit of repeated pairwise geometric averaging: 1 - prod (1 - F_k)^(1/n).
inline Dist averaging_limit(const std::vector<Dist>& comps) {
  const double inv_n = 1.0 / static_cast<double>(comps.size());
  std::vector<Dist::Point> pts;
  for (double v : merged_grid(comps)) {
    double s_left = 1.0;
    double s = 1.0;
    for (const auto& c : comps) {
      s_left *= std::pow(1.0 - c.cdf_left(v), inv_n);
      s *= std::pow(1.0 - c.cdf(v), inv_n);
    }
    pts.push_back({v, 1.0 - s_left, 1.0 - s});
  }
  return Dist::from_points(std::move(pts), "averaging_limit");
}

/// Round-robin pairwise geometric averaging, pairs in the order (1,2), (1,3), ..., (n-1,n).
/// All components are first put on the merged grid so that every average is
/// taken at the same points.
inline std::vector<Dist> averaging_sweeps(std::vector<Dist> comps, int sweeps) {
  const auto grid = merged_grid(comps);
  for (auto& c : comps) c = c.refined(grid);
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < comps.size(); ++i) {
      for (std::size_t j = i + 1; j < comps.size(); ++j) {
        Dist avg = geometric_average(comps[i], comps[j]);
        comps[i] = avg;
        comps[j] = std::move(avg);
      }
    }
  }
  return comps;
}

}  // namespace robust_auction
