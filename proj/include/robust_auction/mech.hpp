#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "robust_auction/dist.hpp"
#include "robust_auction/ironing.hpp"

namespace robust_auction {

/// A bid profile. Bidder indices are zero-based throughout the library.
class Profile {
 public:
  explicit Profile(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("Profile: no bidders");
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("Profile: values must be finite and >= 0");
    }
    order_.resize(values_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return values_[a] > values_[b]; });
  }

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  /// Bidder indices by non-increasing value, ties by index.
  const std::vector<std::size_t>& sorted_desc() const { return order_; }

  /// j-th highest value, 1-based; zero past the end.
  double order_stat(int j) const {
    if (j < 1) throw std::out_of_range("Profile::order_stat: index must be >= 1");
    if (j > size()) return 0.0;
    return values_[order_[j - 1]];
  }

 private:
  std::vector<double> values_;
  std::vector<std::size_t> order_;
};

enum class TieBreak { Lexicographic, Uniform };

struct PostedPrice {
  double price;
};

struct SPAReserve {
  double reserve;
};

/// Myerson's auction designed for n i.i.d. draws from `base`.
struct MyersonIID {
  std::shared_ptr<const Dist> base;
  TieBreak tiebreak = TieBreak::Lexicographic;
  std::shared_ptr<const VirtualValueFn> phi;
};

struct MultiUnit {
  int units;
  double reserve;
};

/// Position auction with click rates alpha_1 >= ... >= alpha_K > 0.
struct Laddered {
  std::vector<double> alpha;
  double reserve;
};

using Mechanism = std::variant<PostedPrice, SPAReserve, MyersonIID, MultiUnit, Laddered>;

inline MyersonIID make_myerson(const Dist& base, TieBreak tiebreak = TieBreak::Lexicographic) {
  auto d = std::make_shared<const Dist>(base);
  auto phi = std::make_shared<const VirtualValueFn>(virtual_values(*d));
  return MyersonIID{std::move(d), tiebreak, std::move(phi)};
}

inline void validate(const Mechanism& mech) {
  auto check_reserve = [](double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("mechanism: reserve must be finite and >= 0");
  };
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PostedPrice>) {
          check_reserve(m.price);
        } else if constexpr (std::is_same_v<T, SPAReserve>) {
          check_reserve(m.reserve);
        } else if constexpr (std::is_same_v<T, MyersonIID>) {
          if (!m.base || !m.phi) throw std::invalid_argument("MyersonIID: missing base distribution");
        } else if constexpr (std::is_same_v<T, MultiUnit>) {
          check_reserve(m.reserve);
          if (m.units < 1) throw std::invalid_argument("MultiUnit: need at least one unit");
        } else {
          check_reserve(m.reserve);
          if (m.alpha.empty()) throw std::invalid_argument("Laddered: need at least one slot");
          for (std::size_t i = 0; i < m.alpha.size(); ++i) {
            if (!(m.alpha[i] > 0.0)) throw std::invalid_argument("Laddered: click rates must be positive");
            if (i > 0 && m.alpha[i] > m.alpha[i - 1]) {
              throw std::invalid_argument("Laddered: click rates must be non-increasing");
            }
          }
        }
      },
      mech);
}

inline std::string describe(const Mechanism& mech) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PostedPrice>) {
          return "posted_price(" + Dist::fmt(m.price) + ")";
        } else if constexpr (std::is_same_v<T, SPAReserve>) {
          return "spa(" + Dist::fmt(m.reserve) + ")";
        } else if constexpr (std::is_same_v<T, MyersonIID>) {
          return std::string("myerson(") + (m.base ? m.base->label() : "?") +
                 (m.tiebreak == TieBreak::Uniform ? ",uniform)" : ",lexicographic)");
        } else if constexpr (std::is_same_v<T, MultiUnit>) {
          return "multiunit(" + std::to_string(m.units) + "," + Dist::fmt(m.reserve) + ")";
        } else {
          std::string s = "laddered([";
          for (std::size_t i = 0; i < m.alpha.size(); ++i) s += (i ? ";" : "") + Dist::fmt(m.alpha[i]);
          return s + "]," + Dist::fmt(m.reserve) + ")";
        }
      },
      mech);
}

struct Award {
  std::size_t bidder;
  double payment;
};

struct Outcome {
  std::vector<Award> winners;
  double total_payment = 0.0;

  void add(std::size_t bidder, double payment) {
    winners.push_back({bidder, payment});
    total_payment += payment;
  }
};

/// Sell at price p to the lowest-indexed bidder with value >= p.
inline Outcome pp_outcome(double p, const Profile& prof) {
  if (!(p >= 0.0)) throw std::invalid_argument("pp_outcome: negative price");
  Outcome out;
  for (std::size_t i = 0; i < prof.values().size(); ++i) {
    if (prof[i] >= p) {
      out.add(i, p);
      break;
    }
  }
  return out;
}

/// Second price with reserve r; ties at the top go to the lowest index.
inline Outcome spa_outcome(double r, const Profile& prof) {
  if (!(r >= 0.0)) throw std::invalid_argument("spa_outcome: negative reserve");
  Outcome out;
  const std::size_t top = prof.sorted_desc().front();
  if (prof[top] >= r) out.add(top, std::max(r, prof.order_stat(2)));
  return out;
}

/// m identical units at the uniform price max(v_(m+1), r).
inline Outcome multiunit_outcome(int m, double r, const Profile& prof) {
  if (m < 1) throw std::invalid_argument("multiunit_outcome: need at least one unit");
  if (m >= prof.size()) throw std::invalid_argument("multiunit_outcome: units must be fewer than bidders");
  if (!(r >= 0.0)) throw std::invalid_argument("multiunit_outcome: negative reserve");
  Outcome out;
  const double price = std::max(prof.order_stat(m + 1), r);
  for (int j = 0; j < m; ++j) {
    const std::size_t b = prof.sorted_desc()[j];
    if (prof[b] >= r) out.add(b, price);
  }
  return out;
}

/// Laddered position auction: slot i goes to the i-th highest bidder when
/// v_(i) >= r, who pays sum_{j>=i} (alpha_j - alpha_{j+1}) max(v_(j+1), r).
inline Outcome laddered_outcome(const std::vector<double>& alpha, double r, const Profile& prof) {
  validate(Laddered{alpha, r});
  const int K = static_cast<int>(alpha.size());
  if (K >= prof.size()) throw std::invalid_argument("laddered_outcome: slots must be fewer than bidders");
  Outcome out;
  for (int i = 1; i <= K; ++i) {
    if (prof.order_stat(i) < r) break;
    double pay = 0.0;
    for (int j = i; j <= K; ++j) {
      const double next = j < K ? alpha[j] : 0.0;
      pay += (alpha[j - 1] - next) * std::max(prof.order_stat(j + 1), r);
    }
    out.add(prof.sorted_desc()[i - 1], pay);
  }
  return out;
}

/// Myerson outcome under a fixed priority order. `priority` lists bidders from
/// most to least favoured in ties.
///
/// The winner is the most favoured bidder among those with the largest
/// non-negative ironed virtual value. The payment is the smallest value that
/// would still win against the other bids: at least as high an ironed virtual
/// value as every less favoured bidder and zero, strictly higher than every
/// more favoured one.
inline Outcome myerson_outcome_priority(const VirtualValueFn& phi, const Profile& prof,
                                        const std::vector<std::size_t>& priority) {
  const std::size_t n = prof.values().size();
  if (priority.size() != n) throw std::invalid_argument("myerson_outcome: priority has wrong length");
  std::vector<double> level(n);
  for (std::size_t i = 0; i < n; ++i) level[i] = phi.ironed(prof[i]);
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::size_t winner = n;
  std::size_t winner_rank = n;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t b = priority[r];
    if (level[b] < 0.0) continue;
    if (winner == n || level[b] > level[winner]) {
      winner = b;
      winner_rank = r;
    }
  }
  Outcome out;
  if (winner == n) return out;
  double above = kNone;
  double at_least = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == winner_rank) continue;
    const double l = level[priority[r]];
    if (r < winner_rank) {
      above = std::max(above, l);
    } else {
      at_least = std::max(at_least, l);
    }
  }
  out.add(winner, phi.threshold(at_least, above));
  return out;
}

/// Priority order decoded from a uniform draw: u selects a permutation of the
/// bidders by successive fractional digits, so a uniform u gives a uniform order.
inline std::vector<std::size_t> priority_from_uniform(std::size_t n, double u) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> order;
  order.reserve(n);
  u = std::clamp(u, 0.0, std::nextafter(1.0, 0.0));
  while (!pool.empty()) {
    const double scaled = u * static_cast<double>(pool.size());
    const std::size_t idx = std::min(static_cast<std::size_t>(scaled), pool.size() - 1);
    u = scaled - static_cast<double>(idx);
    order.push_back(pool[idx]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return order;
}

inline Outcome myerson_outcome(const MyersonIID& m, const Profile& prof, double u = 0.0) {
  validate(m);
  if (m.tiebreak == TieBreak::Uniform) {
    return myerson_outcome_priority(*m.phi, prof, priority_from_uniform(prof.values().size(), u));
  }
  std::vector<std::size_t> lex(prof.values().size());
  std::iota(lex.begin(), lex.end(), std::size_t{0});
  return myerson_outcome_priority(*m.phi, prof, lex);
}

inline Outcome myerson_outcome(const Dist& base, TieBreak tiebreak, const Profile& prof, double u = 0.0) {
  return myerson_outcome(make_myerson(base, tiebreak), prof, u);
}

/// Outcome of any mechanism; `u` only matters for uniform tie-breaking.
inline Outcome outcome(const Mechanism& mech, const Profile& prof, double u = 0.0) {
  return std::visit(
      [&](const auto& m) -> Outcome {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PostedPrice>) {
          return pp_outcome(m.price, prof);
        } else if constexpr (std::is_same_v<T, SPAReserve>) {
          return spa_outcome(m.reserve, prof);
        } else if constexpr (std::is_same_v<T, MyersonIID>) {
          return myerson_outcome(m, prof, u);
        } else if constexpr (std::is_same_v<T, MultiUnit>) {
          return multiunit_outcome(m.units, m.reserve, prof);
        } else {
          return laddered_outcome(m.alpha, m.reserve, prof);
        }
      },
      mech);
}

/// Smallest k such that the total payment depends only on the top k order
/// statistics, or nullopt if the mechanism is not of that form.
inline std::optional<int> topk_class(const Mechanism& mech) {
  return std::visit(
      [](const auto& m) -> std::optional<int> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PostedPrice>) {
          return 1;
        } else if constexpr (std::is_same_v<T, SPAReserve>) {
          return 2;
        } else if constexpr (std::is_same_v<T, MyersonIID>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, MultiUnit>) {
          return m.units + 1;
        } else {
          return static_cast<int>(m.alpha.size()) + 1;
        }
      },
      mech);
}

/// Expected total payment of a top-k mechanism written as
///   sum_s weight_s * r * Pr(v_(j_s) >= r)  +  sum_e weight_e * E[(v_(j_e) - r)^+].
struct SeparableForm {
  struct Term {
    int order;
    double weight;
  };
  double reserve = 0.0;
  std::vector<Term> step;
  std::vector<Term> excess;
};

inline std::optional<SeparableForm> separable_form(const Mechanism& mech) {
  validate(mech);
  return std::visit(
      [](const auto& m) -> std::optional<SeparableForm> {
        using T = std::decay_t<decltype(m)>;
        SeparableForm f;
        if constexpr (std::is_same_v<T, PostedPrice>) {
          f.reserve = m.price;
          f.step.push_back({1, 1.0});
        } else if constexpr (std::is_same_v<T, SPAReserve>) {
          f.reserve = m.reserve;
          f.step.push_back({1, 1.0});
          f.excess.push_back({2, 1.0});
        } else if constexpr (std::is_same_v<T, MyersonIID>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, MultiUnit>) {
          f.reserve = m.reserve;
          for (int j = 1; j <= m.units; ++j) f.step.push_back({j, 1.0});
          f.excess.push_back({m.units + 1, static_cast<double>(m.units)});
        } else {
          f.reserve = m.reserve;
          const int K = static_cast<int>(m.alpha.size());
          for (int i = 1; i <= K; ++i) f.step.push_back({i, m.alpha[i - 1]});
          for (int j = 1; j <= K; ++j) {
            const double next = j < K ? m.alpha[j] : 0.0;
            const double w = j * (m.alpha[j - 1] - next);
            if (w != 0.0) f.excess.push_back({j + 1, w});
          }
        }
        return f;
      },
      mech);
}

}  // namespace robust_auction
