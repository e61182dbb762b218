#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "robust_auction/dist.hpp"

namespace fixtures {

using robust_auction::Atom;
using robust_auction::Dist;
using robust_auction::Knot;

/// 1 with probability q, 2 otherwise.
inline Dist f_disc(double q = 0.8) { return Dist::two_point(1.0, q, 2.0); }

/// Continuous on [1, 2) with survival 0.25 / (v - 0.75) scaled to q, plus an
/// atom at 2: its revenue curve is the concave envelope of f_disc's.
inline Dist f_reg(double q = 0.8, int knots = 257) {
  const double top = 1.0 - q;  // mass of the atom at 2
  // Revenue line through (top, 2 top) and (1, 1): r = a + b s.
  const double b = (1.0 - 2.0 * top) / (1.0 - top);
  const double a = 1.0 - b;
  std::vector<Knot> k;
  for (int i = 0; i < knots; ++i) {
    const double v = 1.0 + static_cast<double>(i) / (knots - 1);
    k.push_back({v, 1.0 - a / (v - b)});
  }
  k.front().cdf = 0.0;
  k.back().cdf = q;
  return Dist::from_table(k, {{2.0, top}});
}

/// 0 with probability 1 - s, 1 with probability s.
inline Dist bernoulli(double s) { return Dist::two_point(0.0, 1.0 - s, 1.0); }

/// Random finite distribution with `size` atoms on values in [0, top].
inline Dist random_discrete(std::mt19937_64& rng, int size, double top = 3.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double m = 0.05 + u(rng);
    atoms.push_back({std::round(u(rng) * top * 100.0) / 100.0, m});
    total += m;
  }
  for (auto& a : atoms) a.mass /= total;
  return Dist::discrete(atoms);
}

/// Random piecewise-linear distribution with optional atoms.
inline Dist random_table(std::mt19937_64& rng, int knots, int atoms) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> vals;
  double v = u(rng);
  for (int i = 0; i < knots; ++i) {
    vals.push_back(v);
    v += 0.05 + u(rng);
  }
  std::vector<Atom> at;
  double atom_mass = 0.0;
  for (int i = 0; i < atoms; ++i) {
    const double m = 0.05 + 0.1 * u(rng);
    at.push_back({vals[static_cast<std::size_t>(u(rng) * knots) % vals.size()] + (i % 2 ? 0.0 : 0.013 * (i + 1)), m});
    atom_mass += m;
  }
  std::vector<double> inc;
  double inc_total = 0.0;
  for (int i = 1; i < knots; ++i) {
    inc.push_back(0.01 + u(rng));
    inc_total += inc.back();
  }
  std::vector<Knot> k{{vals[0], 0.0}};
  double c = 0.0;
  for (int i = 1; i < knots; ++i) {
    c += inc[i - 1] / inc_total * (1.0 - atom_mass);
    k.push_back({vals[i], c});
  }
  k.back().cdf = 1.0 - atom_mass;
  return Dist::from_table(k, at);
}

}  // namespace fixtures
