#pragma once

// Brute-force certifiers for small discrete instances. Nothing here calls the
// closed forms in revenue.hpp or the order-statistic machinery; everything
// is computed by enumeration so the two can be checked against each other.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "robust_auction/dist.hpp"
#include "robust_auction/mech.hpp"

namespace robust_auction::oracle {

inline constexpr std::size_t kOutcomeGuard = 1'000'000;
inline constexpr int kMaxBidders = 8;

/// Per-bidder finite supports.
struct DiscreteInstance {
  std::vector<std::vector<Atom>> bidders;

  static DiscreteInstance from(const std::vector<Dist>& comps) {
    DiscreteInstance inst;
    for (const auto& c : comps) {
      if (!c.is_discrete()) throw std::invalid_argument("oracle: component is not discrete");
      inst.bidders.push_back(c.atoms());
    }
    inst.validate();
    return inst;
  }

  static DiscreteInstance iid(const Dist& d, int n) { return from(std::vector<Dist>(static_cast<std::size_t>(n), d)); }

  void validate() const {
    if (bidders.empty() || static_cast<int>(bidders.size()) > kMaxBidders) {
      throw std::invalid_argument("oracle: bidder count outside [1, 8]");
    }
    std::size_t outcomes = 1;
    for (const auto& b : bidders) {
      double total = 0.0;
      for (const auto& a : b) total += a.mass;
      if (b.empty() || std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("oracle: masses must sum to 1");
      outcomes *= b.size();
      if (outcomes > kOutcomeGuard) throw std::length_error("oracle: outcome count exceeds guard");
    }
  }
};

/// Calls fn(values, probability) for every profile in the product support, in
/// lexicographic index order.
template <class Fn>
void for_each_profile(const DiscreteInstance& inst, Fn&& fn) {
  inst.validate();
  const std::size_t n = inst.bidders.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> values(n);
  while (true) {
    double prob = 1.0;
    for (std::size_t l = 0; l < n; ++l) {
      values[l] = inst.bidders[l][idx[l]].value;
      prob *= inst.bidders[l][idx[l]].mass;
    }
    fn(values, prob);
    std::size_t l = n;
    while (l > 0) {
      --l;
      if (++idx[l] < inst.bidders[l].size()) break;
      idx[l] = 0;
      if (l == 0) return;
    }
  }
}

/// Exact expected revenue. Uniform tie-breaking averages over all n! priority orders.
inline double exhaustive_revenue(const Mechanism& mech, const DiscreteInstance& inst) {
  const std::size_t n = inst.bidders.size();
  std::vector<std::vector<std::size_t>> orders;
  const auto* my = std::get_if<MyersonIID>(&mech);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (my && my->tiebreak == TieBreak::Uniform) {
    do orders.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    orders.push_back(perm);
  }
  double total = 0.0;
  for_each_profile(inst, [&](const std::vector<double>& values, double prob) {
    const Profile prof(values);
    double pay = 0.0;
    if (my) {
      for (const auto& o : orders) pay += myerson_outcome_priority(*my->phi, prof, o).total_payment;
      pay /= static_cast<double>(orders.size());
    } else {
      pay = outcome(mech, prof).total_payment;
    }
    total += prob * pay;
  });
  return total;
}

/// Distribution of the number of successes by enumerating all 2^n patterns.
inline std::vector<double> count_pmf(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n > 20) throw std::invalid_argument("oracle::count_pmf: too many trials to enumerate");
  std::vector<double> pmf(n + 1, 0.0);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double p = 1.0;
    int c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (1u << j)) {
        p *= x[j];
        ++c;
      } else {
        p *= 1.0 - x[j];
      }
    }
    pmf[c] += p;
  }
  return pmf;
}

/// Pr(fewer than m successes).
inline double count_below(const std::vector<double>& x, int m) {
  const auto pmf = count_pmf(x);
  double s = 0.0;
  for (int c = 0; c < m && c < static_cast<int>(pmf.size()); ++c) s += pmf[c];
  return s;
}

/// Pr(v_(i) <= v) for a discrete instance, by summing profile probabilities.
inline double orderstat_cdf_by_enumeration(const DiscreteInstance& inst, int i, double v) {
  double total = 0.0;
  for_each_profile(inst, [&](const std::vector<double>& values, double prob) {
    int above = 0;
    for (double x : values) above += x > v ? 1 : 0;
    if (above <= i - 1) total += prob;
  });
  return total;
}

/// Residual of the constraint Pr(#{j : v_j > v0} <= k - 1) = g for a survival vector x.
inline double pi_k_residual(const std::vector<double>& x, int k, double g) { return count_below(x, k) - g; }

inline double oracle_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return static_cast<double>(mix(mix(mix(seed + 0x632be59bd9b4e019ULL) ^ a) ^ (b * 0x9e3779b97f4a7c15ULL)) >> 11) *
         0x1.0p-53;
}

/// Random points of Pi_k(G) for G on two points {v0, V} with G(v0) = g,
/// written as survival vectors x_j = Pr(v_j = V). The first n - 1 coordinates
/// are uniform; the last solves the constraint by bisection. Infeasible draws
/// are dropped.
inline std::vector<std::vector<double>> feasible_sampler_pi_k(int n, int k, double g, int trials,
                                                              std::uint64_t seed) {
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("feasible_sampler_pi_k: bad (n, k)");
  std::vector<std::vector<double>> out;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(n);
    for (int j = 0; j + 1 < n; ++j) x[j] = oracle_uniform(seed, t, j);
    auto f = [&](double xn) {
      x[n - 1] = xn;
      return count_below(x, k);  // non-increasing in xn
    };
    const double at0 = f(0.0);
    const double at1 = f(1.0);
    if (g > at0 + 1e-15 || g < at1 - 1e-15) continue;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (f(mid) > g) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double xn = std::abs(f(lo) - g) <= std::abs(f(hi) - g) ? lo : hi;
    f(xn);
    if (std::abs(pi_k_residual(x, k, g)) <= 1e-10) out.push_back(x);
  }
  return out;
}

/// Common survival x solving Pr(Bin(n, x) <= k - 1) = g, by bisection.
inline double symmetric_survival(int n, int k, double g) {
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(std::vector<double>(n, mid), k) > g) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct GridCheck {
  double grid_max = 0.0;
  double symmetric = 0.0;
  std::size_t feasible_points = 0;
};

/// Maximises Pr(sum X_j < i) over Bernoulli vectors with Pr(sum X_j < k) = g:
/// x_1..x_{n-1} range over a grid and x_n is solved from the constraint,
/// which is linear in x_n. Also returns the value at the symmetric solution.
inline GridCheck symmetric_max_grid_check(int n, int k, int i, double g, double grid_step) {
  if (!(i < k && k <= n && n <= 5)) throw std::invalid_argument("symmetric_max_grid_check: need i < k <= n <= 5");
  if (!(grid_step >= 1e-2 && grid_step <= 1.0)) throw std::invalid_argument("symmetric_max_grid_check: grid_step < 1e-2");
  const int steps = static_cast<int>(std::llround(1.0 / grid_step));
  GridCheck res;
  res.symmetric = count_below(std::vector<double>(n, symmetric_survival(n, k, g)), i);
  std::vector<int> idx(n - 1, 0);
  std::vector<double> x(n);
  res.grid_max = 0.0;
  while (true) {
    for (int j = 0; j + 1 < n; ++j) x[j] = std::min(1.0, idx[j] * grid_step);
    std::vector<double> head(x.begin(), x.end() - 1);
    const auto pmf = count_pmf(head);
    double below_k = 0.0;
    for (int c = 0; c < k; ++c) below_k += pmf[c];
    const double slope = pmf[k - 1];
    // Pr(S < k) = below_k - x_n * Pr(S' = k - 1)
    double xn = -1.0;
    if (slope > 0.0) {
      xn = (below_k - g) / slope;
      if (xn < 0.0 && xn > -1e-12) xn = 0.0;
      if (xn > 1.0 && xn < 1.0 + 1e-12) xn = 1.0;
    } else if (std::abs(below_k - g) <= 1e-15) {
      xn = 0.0;
    }
    if (xn >= 0.0 && xn <= 1.0) {
      x[n - 1] = xn;
      res.grid_max = std::max(res.grid_max, count_below(x, i));
      ++res.feasible_points;
    }
    int j = 0;
    while (j < n - 1) {
      if (++idx[j] <= steps) break;
      idx[j] = 0;
      ++j;
    }
    if (j == n - 1) break;
  }
  return res;
}

struct CounterexampleReport {
  double q = 0.0;
  double survival_two = 0.0;       // Pr(v = 2) for each active bidder of the construction
  double opt_iid = 0.0;            // by enumeration
  double opt_construction = 0.0;   // by enumeration
  double closed_iid = 0.0;         // 2 - q^2
  double closed_construction = 0.0;
  double second_stat_gap = 0.0;    // max |CDF difference| of v_(2) at the support points
  bool strict = false;
  bool regime = false;             // 3q^2 - 2q^3 >= 3/4
  double regime_threshold = 0.0;
};

/// Root of 3q^2 - 2q^3 = 3/4 on (0, 1).
inline double counterexample_regime_threshold() {
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (3 * mid * mid - 2 * mid * mid * mid < 0.75) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Two instances with the same second-highest-value distribution: three i.i.d.
/// bidders on {1, 2} with Pr(1) = q, and two i.i.d. bidders on {1, 2} plus a
/// bidder fixed at zero. Myerson's revenue, each designed for its own
/// distribution, is enumerated for both.
inline CounterexampleReport counterexample_certificate(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("counterexample_certificate: q outside (0,1)");
  CounterexampleReport r;
  r.q = q;
  const double s = std::sqrt(1.0 - 3 * q * q + 2 * q * q * q);
  r.survival_two = s;
  const Dist disc = Dist::discrete({{1.0, q}, {2.0, 1.0 - q}}, "twopoint(1," + Dist::fmt(q) + ",2)");
  const Dist active = Dist::discrete({{1.0, 1.0 - s}, {2.0, s}}, "twopoint(1," + Dist::fmt(1.0 - s) + ",2)");
  const Dist zero = Dist::point_mass(0.0);
  const auto iid = DiscreteInstance::iid(disc, 3);
  const auto constr = DiscreteInstance::from({active, active, zero});
  r.opt_iid = exhaustive_revenue(make_myerson(disc), iid);
  r.opt_construction = exhaustive_revenue(make_myerson(active), constr);
  r.closed_iid = 2.0 - q * q;
  r.closed_construction = 1.0 + s;
  for (double v : {0.0, 1.0, 2.0}) {
    r.second_stat_gap = std::max(
        r.second_stat_gap, std::abs(orderstat_cdf_by_enumeration(iid, 2, v) - orderstat_cdf_by_enumeration(constr, 2, v)));
  }
  r.strict = r.opt_construction < r.opt_iid;
  r.regime = 3 * q * q - 2 * q * q * q >= 0.75;
  r.regime_threshold = counterexample_regime_threshold();
  return r;
}

struct DominanceCheck {
  bool holds = true;
  double worst_margin = 0.0;  // min over pairs of LHS - RHS
  std::size_t pairs = 0;
};

/// For h >= l on the merged grid, compares Pr(max >= h, min >= l) for the pair
/// (d1, d2) against the i.i.d. pair (d, d), for both Pr(v >= x) and Pr(v > x).
inline DominanceCheck dominance_bivariate_check(const Dist& d1, const Dist& d2, const Dist& d,
                                                double tolerance = 1e-12) {
  std::vector<double> grid;
  for (const Dist* p : {&d1, &d2, &d}) {
    for (const auto& pt : p->points()) grid.push_back(pt.value);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  DominanceCheck res;
  res.worst_margin = std::numeric_limits<double>::infinity();
  for (int side = 0; side < 2; ++side) {
    auto surv = [side](const Dist& x, double v) { return side == 0 ? 1.0 - x.cdf_left(v) : 1.0 - x.cdf(v); };
    for (std::size_t a = 0; a < grid.size(); ++a) {
      const double h = grid[a];
      const double s1h = surv(d1, h), s2h = surv(d2, h), sh = surv(d, h);
      for (std::size_t b = 0; b <= a; ++b) {
        const double l = grid[b];
        const double lhs = s1h * surv(d2, l) + s2h * surv(d1, l) - s1h * s2h;
        const double rhs = 2.0 * sh * surv(d, l) - sh * sh;
        res.worst_margin = std::min(res.worst_margin, lhs - rhs);
        ++res.pairs;
      }
    }
  }
  res.holds = res.worst_margin >= -tolerance;
  return res;
}

/// Runs round-robin pairwise geometric averaging on the survival functions
/// (pairs (1,2), (1,3), ..., (n-1,n) per sweep) over the merged grid and
/// returns the sup-norm distance of every component to 1 - prod (1 - F_k)^(1/n).
inline double averaging_convergence_check(const std::vector<Dist>& comps, int sweeps) {
  std::vector<double> grid;
  for (const auto& c : comps) {
    for (const auto& pt : c.points()) grid.push_back(pt.value);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t n = comps.size();
  // Both limits at every grid value, stored as survival.
  std::vector<std::vector<double>> s(n, std::vector<double>(2 * grid.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      s[i][2 * g] = 1.0 - comps[i].cdf_left(grid[g]);
      s[i][2 * g + 1] = 1.0 - comps[i].cdf(grid[g]);
    }
  }
  std::vector<double> limit(2 * grid.size(), 1.0);
  for (std::size_t g = 0; g < limit.size(); ++g) {
    for (std::size_t i = 0; i < n; ++i) limit[g] *= std::pow(s[i][g], 1.0 / static_cast<double>(n));
  }
  for (int t = 0; t < sweeps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        for (std::size_t g = 0; g < limit.size(); ++g) s[i][g] = s[j][g] = std::sqrt(s[i][g] * s[j][g]);
      }
    }
  }
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < limit.size(); ++g) err = std::max(err, std::abs(s[i][g] - limit[g]));
  }
  return err;
}

}  // namespace robust_auction::oracle
