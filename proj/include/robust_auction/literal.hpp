#pragma once

// Distribution literals in JSON form:
//   ["uniform", lo, hi]  ["exponential", rate]  ["beta", a, b]
//   ["normal", mean, sd]  ["twopoint", v1, p1, v2]  ["atom", v]
//   ["discrete", [[v, mass], ...]]
//   ["table", {"knots": [[v, F], ...], "atoms": [[v, mass], ...]}]

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "robust_auction/dist.hpp"

namespace robust_auction::literal {

using json = nlohmann::json;

namespace detail {

inline double number(const json& j, std::size_t i, const std::string& family) {
  if (i >= j.size() || !j[i].is_number()) {
    throw std::invalid_argument("distribution literal '" + family + "': parameter " + std::to_string(i) +
                                " missing or not a number");
  }
  return j[i].get<double>();
}

inline std::vector<Atom> atom_list(const json& j) {
  std::vector<Atom> out;
  if (!j.is_array()) throw std::invalid_argument("distribution literal: atom list must be an array");
  for (const auto& a : j) {
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
      throw std::invalid_argument("distribution literal: atoms are [value, mass] pairs");
    }
    out.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  return out;
}

inline void arity(const json& j, std::size_t n, const std::string& family) {
  if (j.size() != n + 1) {
    throw std::invalid_argument("distribution literal '" + family + "' takes " + std::to_string(n) + " parameters");
  }
}

}  // namespace detail

inline Dist parse_dist(const json& j, std::size_t grid = kDefaultGrid) {
  if (!j.is_array() || j.empty() || !j[0].is_string()) {
    throw std::invalid_argument("distribution literal must be [\"family\", params...]");
  }
  const std::string f = j[0].get<std::string>();
  if (f == "uniform") {
    detail::arity(j, 2, f);
    return Dist::uniform(detail::number(j, 1, f), detail::number(j, 2, f), grid);
  }
  if (f == "exponential") {
    detail::arity(j, 1, f);
    return Dist::exponential(detail::number(j, 1, f), grid);
  }
  if (f == "beta") {
    detail::arity(j, 2, f);
    return Dist::beta(detail::number(j, 1, f), detail::number(j, 2, f), grid);
  }
  if (f == "normal") {
    detail::arity(j, 2, f);
    return Dist::normal(detail::number(j, 1, f), detail::number(j, 2, f), grid);
  }
  if (f == "twopoint") {
    detail::arity(j, 3, f);
    return Dist::two_point(detail::number(j, 1, f), detail::number(j, 2, f), detail::number(j, 3, f));
  }
  if (f == "atom") {
    detail::arity(j, 1, f);
    return Dist::point_mass(detail::number(j, 1, f));
  }
  if (f == "discrete") {
    detail::arity(j, 1, f);
    return Dist::discrete(detail::atom_list(j[1]));
  }
  if (f == "table") {
    detail::arity(j, 1, f);
    const json& t = j[1];
    if (!t.is_object()) throw std::invalid_argument("distribution literal 'table' takes an object");
    std::vector<Knot> knots;
    if (t.contains("knots")) {
      for (const auto& a : detail::atom_list(t.at("knots"))) knots.push_back({a.value, a.mass});
    }
    std::vector<Atom> atoms;
    if (t.contains("atoms")) atoms = detail::atom_list(t.at("atoms"));
    return Dist::from_table(std::move(knots), std::move(atoms));
  }
  throw std::invalid_argument("unknown distribution family '" + f + "'");
}

inline Dist parse_dist(const std::string& text, std::size_t grid = kDefaultGrid) {
  return parse_dist(json::parse(text), grid);
}

}  // namespace robust_auction::literal
