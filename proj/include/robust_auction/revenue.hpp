#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "robust_auction/dist.hpp"
#include "robust_auction/ironing.hpp"
#include "robust_auction/mech.hpp"
#include "robust_auction/numeric.hpp"
#include "robust_auction/orderstat.hpp"

namespace robust_auction {

/// Raised when a robust guarantee is requested for a mechanism outside the
/// class for which the consistent i.i.d. profile is the worst case.
class UnsupportedMechanism : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { ClosedForm, MonteCarlo };

struct RevenueReport {
  std::string mechanism;
  std::string distribution;
  double expected_revenue = 0.0;
  Method method = Method::ClosedForm;
  std::optional<double> mc_stderr;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;

  static std::string csv_header() { return "mechanism,distribution,method,expected_revenue,mc_stderr,samples,seed"; }

  std::string csv_row() const {
    auto quote = [](const std::string& s) {
      if (s.find_first_of(",\"") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      return q + "\"";
    };
    return quote(mechanism) + "," + quote(distribution) + "," +
           (method == Method::ClosedForm ? "closed-form" : "monte-carlo") + "," + Dist::fmt(expected_revenue) + "," +
           (mc_stderr ? Dist::fmt(*mc_stderr) : "") + "," + (samples ? std::to_string(*samples) : "") + "," +
           (seed ? std::to_string(*seed) : "");
  }
};

/// Upper tails Pr(v_(j) >= v) of the order statistics of a product
/// distribution and their integrals over [r, inf).
///
/// Inside a grid segment every component CDF is linear, so Pr(v_(j) >= v) is a
/// polynomial of degree n in v and a Gauss-Legendre rule with ceil((n+1)/2)
/// nodes integrates it exactly.
class OrderStatTails {
 public:
  explicit OrderStatTails(const ProductDist& pd) : pd_(pd), grid_(pd.grid()), n_(pd.size()) {
    const auto& rule = numeric::gauss_legendre((n_ + 2) / 2);
    const std::size_t segs = grid_.size() > 0 ? grid_.size() - 1 : 0;
    suffix_.assign((segs + 1) * static_cast<std::size_t>(n_ + 1), 0.0);
    for (std::size_t s = segs; s-- > 0;) {
      const auto seg = segment_integrals(grid_[s], grid_[s + 1], rule);
      for (int j = 1; j <= n_; ++j) suffix_at(s, j) = suffix_at(s + 1, j) + seg[j];
    }
  }

  int size() const { return n_; }

  /// Pr(v_(j) >= v).
  double tail_ge(int j, double v) const {
    check(j);
    std::vector<double> x(n_);
    for (int l = 0; l < n_; ++l) x[l] = pd_[l].survival_ge(v);
    return tail_from(poisson_binomial_pmf(x), j);
  }

  /// Integral of Pr(v_(j) >= v) over [r, inf), i.e. E[(v_(j) - r)^+].
  double excess(int j, double r) const {
    check(j);
    if (r >= grid_.back()) return 0.0;
    if (r < grid_.front()) return (grid_.front() - r) + suffix_at(0, j);
    const std::size_t s = static_cast<std::size_t>(std::upper_bound(grid_.begin(), grid_.end(), r) - grid_.begin()) - 1;
    const auto& rule = numeric::gauss_legendre((n_ + 2) / 2);
    return segment_integrals(r, grid_[s + 1], rule)[j] + suffix_at(s + 1, j);
  }

  double evaluate(const SeparableForm& f) const {
    double total = 0.0;
    for (const auto& t : f.step) total += t.weight * f.reserve * tail_ge(t.order, f.reserve);
    for (const auto& t : f.excess) total += t.weight * excess(t.order, f.reserve);
    return total;
  }

  const std::vector<double>& grid() const { return grid_; }

 private:
  void check(int j) const {
    if (j < 1 || j > n_) throw std::out_of_range("order statistic index outside [1, n]");
  }

  static double tail_from(const std::vector<double>& pmf, int j) {
    double s = 0.0;
    for (std::size_t t = static_cast<std::size_t>(j); t < pmf.size(); ++t) s += pmf[t];
    return std::min(s, 1.0);
  }

  std::vector<double> segment_integrals(double a, double b, const numeric::QuadratureRule& rule) const {
    std::vector<double> out(n_ + 1, 0.0);
    if (!(b > a)) return out;
    std::vector<double> x(n_);
    for (std::size_t t = 0; t < rule.nodes.size(); ++t) {
      const double v = a + rule.nodes[t] * (b - a);
      for (int l = 0; l < n_; ++l) x[l] = 1.0 - pd_[l].cdf(v);
      const auto pmf = poisson_binomial_pmf(x);
      double tail = 0.0;
      for (int j = n_; j >= 1; --j) {
        tail += pmf[j];
        out[j] += rule.weights[t] * (b - a) * tail;
      }
    }
    return out;
  }

  double& suffix_at(std::size_t s, int j) { return suffix_[s * static_cast<std::size_t>(n_ + 1) + j]; }
  double suffix_at(std::size_t s, int j) const { return suffix_[s * static_cast<std::size_t>(n_ + 1) + j]; }

  ProductDist pd_;
  std::vector<double> grid_;
  int n_;
  std::vector<double> suffix_;
};

/// p * (1 - prod F_i(p-)).
inline double pp_expected_revenue(double p, const ProductDist& pd) {
  if (!(p >= 0.0)) throw std::invalid_argument("pp_expected_revenue: negative price");
  double none = 1.0;
  for (const auto& d : pd.components()) none *= d.cdf_left(p);
  return p * (1.0 - none);
}

/// r * Pr(v_(1) >= r) + integral over [r, inf) of Pr(v_(2) >= v).
inline double spa_expected_revenue(double r, const ProductDist& pd) {
  if (!(r >= 0.0)) throw std::invalid_argument("spa_expected_revenue: negative reserve");
  if (pd.size() == 1) return pp_expected_revenue(r, pd);
  return OrderStatTails(pd).evaluate(*separable_form(SPAReserve{r}));
}

/// Expected revenue of Myerson's auction for n i.i.d. draws from `base`,
/// evaluated on the same distribution: E[max(0, max_i ironed phi(v_i))],
/// summed edge by edge over the ironed revenue curve.
inline double myerson_iid_revenue(const Dist& base, int n) {
  if (n < 1) throw std::invalid_argument("myerson_iid_revenue: need at least one bidder");
  const RevenueCurve c = revenue_curve(base);
  double total = 0.0;
  for (std::size_t e = 0; e + 1 < c.hull.size(); ++e) {
    const double slope = c.edge_slope(e);
    if (!(slope > 0.0)) continue;
    const double qa = c.knots[c.hull[e]].quantile;
    const double qb = c.knots[c.hull[e + 1]].quantile;
    total += slope * (std::pow(1.0 - qa, n) - std::pow(1.0 - qb, n));
  }
  return total;
}

inline bool all_components_equal(const ProductDist& pd, const Dist& d) {
  for (const auto& c : pd.components()) {
    if (c.points().size() != d.points().size()) return false;
    for (std::size_t i = 0; i < c.points().size(); ++i) {
      const auto& a = c.points()[i];
      const auto& b = d.points()[i];
      if (a.value != b.value || a.cdf != b.cdf || a.cdf_left != b.cdf_left) return false;
    }
  }
  return true;
}

/// Closed-form expected revenue where one is available: every top-k
/// mechanism, and Myerson when the bidders are i.i.d. from its base.
inline std::optional<double> closed_form_revenue(const Mechanism& mech, const ProductDist& pd) {
  validate(mech);
  if (const auto* m = std::get_if<MyersonIID>(&mech)) {
    if (!all_components_equal(pd, *m->base)) return std::nullopt;
    return myerson_iid_revenue(*m->base, pd.size());
  }
  if (const auto* m = std::get_if<PostedPrice>(&mech)) return pp_expected_revenue(m->price, pd);
  const auto k = topk_class(mech);
  if (*k > pd.size()) throw std::invalid_argument("mechanism needs more bidders than the profile has");
  return OrderStatTails(pd).evaluate(*separable_form(mech));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based uniform draw in [0, 1) keyed by (seed, sample, stream).
inline double counter_uniform(std::uint64_t seed, std::uint64_t sample, std::uint64_t stream) {
  const std::uint64_t h =
      detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ sample) + stream * 0xd1b54a32d192ed03ULL);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Monte Carlo estimate. Sample i uses streams 0..n-1 for the values and
/// stream n for the tie-break, so the result does not depend on how samples
/// are partitioned.
inline RevenueReport mc_expected_revenue(const Mechanism& mech, const ProductDist& pd, std::uint64_t samples,
                                         std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("mc_expected_revenue: need at least one sample");
  validate(mech);
  const int n = pd.size();
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> values(n);
  for (std::uint64_t i = 0; i < samples; ++i) {
    for (int l = 0; l < n; ++l) values[l] = pd[l].sample(counter_uniform(seed, i, l));
    const double pay = outcome(mech, Profile(values), counter_uniform(seed, i, n)).total_payment;
    sum += pay;
    sum_sq += pay * pay;
  }
  const double s = static_cast<double>(samples);
  const double mean = sum / s;
  const double var = samples > 1 ? std::max(0.0, (sum_sq - s * mean * mean) / (s - 1.0)) : 0.0;
  RevenueReport rep;
  rep.mechanism = describe(mech);
  rep.distribution = pd.label();
  rep.expected_revenue = mean;
  rep.method = Method::MonteCarlo;
  rep.mc_stderr = std::sqrt(var / s);
  rep.samples = samples;
  rep.seed = seed;
  return rep;
}

/// Worst-case expected revenue of a top-k mechanism over Pi_l(G), l >= k,
/// which is attained at the consistent i.i.d. profile.
inline double worst_case_revenue_topk(const Mechanism& mech, const AmbiguitySpec& spec) {
  validate(mech);
  const auto k = topk_class(mech);
  if (!k) {
    throw UnsupportedMechanism(
        "worst case requested for " + describe(mech) +
        ": it is not a top-k order-statistic mechanism, and evaluating it at the consistent i.i.d. distribution "
        "would overstate its guarantee");
  }
  if (*k > spec.k) {
    throw UnsupportedMechanism("worst case requested for " + describe(mech) + ": its payments depend on the top " +
                               std::to_string(*k) + " values but only the " + std::to_string(spec.k) +
                               "-th order statistic is known");
  }
  return *closed_form_revenue(mech, ProductDist::iid(consistent_iid(spec), spec.n));
}

/// A mechanism family indexed by its reserve price.
struct ReserveFamily {
  enum class Kind { PostedPrice, SPA, MultiUnit, Laddered };
  Kind kind = Kind::SPA;
  int units = 1;
  std::vector<double> alpha;

  Mechanism at(double r) const {
    switch (kind) {
      case Kind::PostedPrice: return PostedPrice{r};
      case Kind::SPA: return SPAReserve{r};
      case Kind::MultiUnit: return MultiUnit{units, r};
      case Kind::Laddered: return Laddered{alpha, r};
    }
    throw std::logic_error("ReserveFamily: bad kind");
  }
};

struct ReserveResult {
  double reserve = 0.0;
  double revenue = 0.0;
  RegularityReport regularity;  // of the consistent i.i.d. distribution
};

/// Maximises a revenue function of the reserve: every grid point is a
/// candidate, then the segments on either side of the best one are refined by
/// golden-section search. Ties go to the smaller reserve.
template <class F>
std::pair<double, double> maximise_over_grid(F&& revenue, const std::vector<double>& grid, double x_tolerance = 1e-8) {
  std::vector<double> cand{0.0};
  cand.insert(cand.end(), grid.begin(), grid.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::size_t best = 0;
  double best_rev = revenue(cand[0]);
  for (std::size_t i = 1; i < cand.size(); ++i) {
    const double r = revenue(cand[i]);
    if (r > best_rev + 1e-12 * std::max(1.0, std::abs(best_rev))) {
      best = i;
      best_rev = r;
    }
  }
  double best_x = cand[best];
  const std::size_t first = best == 0 ? 0 : best - 1;
  const std::size_t last = std::min(best + 1, cand.size() - 1);
  for (std::size_t s = first; s < last; ++s) {
    auto [x, fx] = numeric::golden_section_max(revenue, cand[s], cand[s + 1], x_tolerance);
    if (fx > best_rev + 1e-12 * std::max(1.0, std::abs(best_rev))) {
      best_x = x;
      best_rev = fx;
    }
  }
  return {best_x, best_rev};
}

/// Reserve maximising the worst-case revenue of `family` over Pi_k(G).
inline ReserveResult optimal_robust_reserve(const AmbiguitySpec& spec, const ReserveFamily& family) {
  const auto k = topk_class(family.at(0.0));
  if (*k > spec.k) throw UnsupportedMechanism("reserve family needs more order statistics than are known");
  const Dist fbar = consistent_iid(spec);
  const ProductDist pd = ProductDist::iid(fbar, spec.n);
  std::optional<OrderStatTails> tails;
  if (family.kind != ReserveFamily::Kind::PostedPrice) {
    if (*k > spec.n) throw std::invalid_argument("reserve family needs more bidders than n");
    tails.emplace(pd);
  }
  auto rev = [&](double r) {
    const Mechanism m = family.at(r);
    if (!tails) return pp_expected_revenue(r, pd);
    return tails->evaluate(*separable_form(m));
  };
  ReserveResult out;
  std::tie(out.reserve, out.revenue) = maximise_over_grid(rev, pd.grid());
  out.regularity = is_regular_above_reserve(fbar);
  return out;
}

/// Root of z (1 - ln z) = g on [0, 1]; the map is increasing there.
inline double z_star(double g) {
  if (!(g >= 0.0 && g <= 1.0)) throw std::domain_error("z_star: g outside [0,1]");
  if (g == 0.0) return 0.0;
  if (g == 1.0) return 1.0;
  return numeric::bisect_increasing([](double z) { return z * (1.0 - std::log(z)); }, g, 1e-300, 1.0);
}

/// Integral of 1 - F over [p, inf), exact on the representation.
inline double tail_integral(const Dist& d, double p) {
  const auto& pts = d.points();
  double total = 0.0;
  if (p < pts.front().value) {
    total += pts.front().value - p;
    p = pts.front().value;
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i].value;
    const double b = pts[i + 1].value;
    if (b <= p) continue;
    const double lo = std::max(a, p);
    const double s_lo = 1.0 - d.cdf(lo);
    const double s_hi = 1.0 - pts[i + 1].cdf_left;
    total += 0.5 * (s_lo + s_hi) * (b - lo);
  }
  return total;
}

/// tail_integral with suffix sums over the segments, for repeated queries.
class TailIntegral {
 public:
  explicit TailIntegral(const Dist& d) : d_(d), suffix_(d.points().size(), 0.0) {
    const auto& pts = d_.points();
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
      suffix_[i] = suffix_[i + 1] + 0.5 * ((1.0 - pts[i].cdf) + (1.0 - pts[i + 1].cdf_left)) * (pts[i + 1].value - pts[i].value);
    }
  }

  double operator()(double p) const {
    const auto& pts = d_.points();
    if (p < pts.front().value) return (pts.front().value - p) + suffix_.front();
    if (p >= pts.back().value) return 0.0;
    const std::size_t i = static_cast<std::size_t>(
        std::upper_bound(pts.begin(), pts.end(), p, [](double x, const Dist::Point& q) { return x < q.value; }) -
        pts.begin()) - 1;
    const double b = pts[i + 1].value;
    return 0.5 * ((1.0 - d_.cdf(p)) + (1.0 - pts[i + 1].cdf_left)) * (b - p) + suffix_[i + 1];
  }

 private:
  Dist d_;
  std::vector<double> suffix_;
};

/// Revenue guarantee of SPA(p) that holds for every number of bidders when
/// only the distribution G of the second-highest value is known.
inline double unknown_n_bound(double p, const Dist& G) {
  if (!(p >= 0.0)) throw std::invalid_argument("unknown_n_bound: negative reserve");
  return p * (1.0 - z_star(G.cdf_left(p))) + tail_integral(G, p);
}

inline std::pair<double, double> optimal_unknown_n_reserve(const Dist& G) {
  std::vector<double> grid;
  for (const auto& pt : G.points()) grid.push_back(pt.value);
  const TailIntegral tail(G);
  return maximise_over_grid([&](double p) { return p * (1.0 - z_star(G.cdf_left(p))) + tail(p); }, grid);
}

struct Sandwich {
  double lower = 0.0;  // worst case of SPA at its optimal robust reserve
  double reserve = 0.0;
  double upper = 0.0;  // Myerson for the consistent i.i.d. profile, on that profile
  bool regular_above_reserve = false;
};

inline Sandwich robust_sandwich(const AmbiguitySpec& spec) {
  if (spec.k < 2) throw std::invalid_argument("robust_sandwich: needs k >= 2");
  Sandwich s;
  const auto res = optimal_robust_reserve(spec, ReserveFamily{});
  s.lower = res.revenue;
  s.reserve = res.reserve;
  s.upper = myerson_iid_revenue(consistent_iid(spec), spec.n);
  s.regular_above_reserve = res.regularity.regular_above_reserve;
  return s;
}

}  // namespace robust_auction
