#pragma once

// Command implementations behind tools/robust_auction.cpp. Each command reads
// a Scenario, writes CSV to `out`, and returns a process exit code.
//
// Scenario files are JSON:
//   {
//     "n": 3, "k": 2,
//     "G": ["uniform", 0, 1],
//     "mechanism": {"family": "spa", "reserve": 0.5},
//     "mode": "unknown-n",
//     "profile": [["uniform", 0, 1], ...],
//     "samples": 100000, "seed": 7, "grid": 4096
//   }
// Mechanism families: posted_price {price}, spa {reserve}, multiunit {units,
// reserve}, laddered {alpha, reserve}, myerson {base?, tiebreak?}. A reserve
// or price of "optimize" asks for the robust optimum.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "robust_auction/dist.hpp"
#include "robust_auction/ironing.hpp"
#include "robust_auction/literal.hpp"
#include "robust_auction/mech.hpp"
#include "robust_auction/oracle.hpp"
#include "robust_auction/orderstat.hpp"
#include "robust_auction/revenue.hpp"

namespace robust_auction::cli {

using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kUnsupported = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line overrides; each one wins over the config file.
struct Settings {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::size_t> grid;
  std::optional<double> q;
};

struct Scenario {
  json doc = json::object();
  std::size_t grid = kDefaultGrid;
  std::optional<std::uint64_t> seed;
  std::uint64_t samples = 100000;

  static Scenario load(const Settings& s) {
    Scenario sc;
    if (s.config) {
      std::ifstream in(*s.config);
      if (!in) throw ConfigError("cannot open config '" + *s.config + "'");
      try {
        sc.doc = json::parse(in, nullptr, true, true);
      } catch (const json::exception& e) {
        throw ConfigError("config '" + *s.config + "' is not valid JSON: " + e.what());
      }
      if (!sc.doc.is_object()) throw ConfigError("config must be a JSON object");
    }
    if (sc.doc.contains("grid")) sc.grid = sc.unsigned_field("grid");
    if (sc.doc.contains("seed")) sc.seed = sc.unsigned_field("seed");
    if (sc.doc.contains("samples")) sc.samples = sc.unsigned_field("samples");
    if (s.grid) sc.grid = *s.grid;
    if (s.seed) sc.seed = *s.seed;
    if (s.samples) sc.samples = *s.samples;
    if (sc.grid < 2) throw ConfigError("grid must be at least 2");
    if (sc.samples < 1) throw ConfigError("samples must be at least 1");
    return sc;
  }

  std::uint64_t unsigned_field(const std::string& key) const {
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("'" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  int int_field(const std::string& key, std::optional<int> fallback = std::nullopt) const {
    if (!doc.contains(key)) {
      if (fallback) return *fallback;
      throw ConfigError("config is missing '" + key + "'");
    }
    if (!doc.at(key).is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return doc.at(key).get<int>();
  }

  Dist dist(const json& j) const {
    try {
      return literal::parse_dist(j, grid);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  Dist G() const {
    if (!doc.contains("G")) throw ConfigError("config is missing 'G'");
    return dist(doc.at("G"));
  }

  AmbiguitySpec spec(std::optional<int> default_k = std::nullopt) const {
    const int n = int_field("n");
    const int k = int_field("k", default_k);
    try {
      return AmbiguitySpec(n, k, G());
    } catch (const std::logic_error& e) {
      throw ConfigError(std::string("bad (n, k): ") + e.what());
    }
  }

  std::string mode() const {
    if (!doc.contains("mode")) return "known-n";
    if (!doc.at("mode").is_string()) throw ConfigError("'mode' must be a string");
    return doc.at("mode").get<std::string>();
  }

  const json& mechanism_json() const {
    if (!doc.contains("mechanism") || !doc.at("mechanism").is_object()) {
      throw ConfigError("config is missing the 'mechanism' object");
    }
    const json& m = doc.at("mechanism");
    if (!m.contains("family") || !m.at("family").is_string()) throw ConfigError("mechanism needs a 'family'");
    return m;
  }

  std::string family() const { return mechanism_json().at("family").get<std::string>(); }

  /// The reserve or price parameter; nullopt means "optimize".
  std::optional<double> reserve() const {
    const json& m = mechanism_json();
    const char* key = family() == "posted_price" ? "price" : "reserve";
    if (!m.contains(key)) return 0.0;
    const json& r = m.at(key);
    if (r.is_string() && r.get<std::string>() == "optimize") return std::nullopt;
    if (!r.is_number()) throw ConfigError(std::string("mechanism '") + key + "' must be a number or \"optimize\"");
    return r.get<double>();
  }

  ReserveFamily reserve_family() const {
    const json& m = mechanism_json();
    const std::string f = family();
    ReserveFamily fam;
    if (f == "posted_price") {
      fam.kind = ReserveFamily::Kind::PostedPrice;
    } else if (f == "spa") {
      fam.kind = ReserveFamily::Kind::SPA;
    } else if (f == "multiunit") {
      fam.kind = ReserveFamily::Kind::MultiUnit;
      if (!m.contains("units") || !m.at("units").is_number_integer()) throw ConfigError("multiunit needs integer 'units'");
      fam.units = m.at("units").get<int>();
    } else if (f == "laddered") {
      fam.kind = ReserveFamily::Kind::Laddered;
      if (!m.contains("alpha") || !m.at("alpha").is_array()) throw ConfigError("laddered needs an 'alpha' array");
      for (const auto& a : m.at("alpha")) {
        if (!a.is_number()) throw ConfigError("laddered 'alpha' entries must be numbers");
        fam.alpha.push_back(a.get<double>());
      }
    } else if (f == "myerson") {
      throw UnsupportedMechanism(
          "myerson has no reserve family: its payments depend on every order statistic, so its worst case over "
          "the ambiguity set is not attained at the consistent i.i.d. distribution");
    } else {
      throw ConfigError("unknown mechanism family '" + f + "'");
    }
    try {
      validate(fam.at(0.0));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return fam;
  }

  /// The configured mechanism. Myerson is designed for `base` when given, else for `fallback_base`.
  Mechanism mechanism(const std::optional<Dist>& fallback_base) const {
    const json& m = mechanism_json();
    if (family() == "myerson") {
      TieBreak tb = TieBreak::Lexicographic;
      if (m.contains("tiebreak")) {
        const std::string t = m.at("tiebreak").is_string() ? m.at("tiebreak").get<std::string>() : "";
        if (t == "uniform") {
          tb = TieBreak::Uniform;
        } else if (t != "lexicographic") {
          throw ConfigError("tiebreak must be \"lexicographic\" or \"uniform\"");
        }
      }
      if (m.contains("base")) return make_myerson(dist(m.at("base")), tb);
      if (!fallback_base) throw ConfigError("myerson needs a 'base' distribution");
      return make_myerson(*fallback_base, tb);
    }
    const auto r = reserve();
    if (!r) throw ConfigError("\"optimize\" is only meaningful for the reserve and worstcase commands");
    const Mechanism mech = reserve_family().at(*r);
    try {
      validate(mech);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return mech;
  }

  std::vector<Dist> profile() const {
    if (!doc.contains("profile")) {
      if (doc.contains("iid")) return std::vector<Dist>(static_cast<std::size_t>(int_field("n")), dist(doc.at("iid")));
      throw ConfigError("simulate needs a 'profile' list or an 'iid' distribution with 'n'");
    }
    if (!doc.at("profile").is_array() || doc.at("profile").empty()) throw ConfigError("'profile' must be a non-empty list");
    std::vector<Dist> out;
    for (const auto& j : doc.at("profile")) out.push_back(dist(j));
    if (doc.contains("n") && int_field("n") != static_cast<int>(out.size())) {
      throw ConfigError("'n' does not match the number of profile components");
    }
    return out;
  }
};

inline std::string fmt(double x) { return Dist::fmt(x); }

/// Knot table of the consistent i.i.d. distribution with the round-trip
/// residual |H_{n,k}(Fbar) - G| at each knot, both one-sided limits.
inline int cmd_invert(const Scenario& sc, std::ostream& out) {
  const AmbiguitySpec spec = sc.spec();
  const Dist fbar = consistent_iid(spec);
  out << "value,cdf_left,cdf,residual\n";
  for (const auto& p : fbar.points()) {
    const double res = std::max(std::abs(h_poly(spec.n, spec.k, p.cdf) - spec.G.cdf(p.value)),
                                std::abs(h_poly(spec.n, spec.k, p.cdf_left) - spec.G.cdf_left(p.value)));
    out << fmt(p.value) << "," << fmt(p.cdf_left) << "," << fmt(p.cdf) << "," << fmt(res) << "\n";
  }
  return kOk;
}

/// Robust reserve for the configured family. In unknown-n mode only the
/// second-highest value's distribution G is known and the bidder count is not.
inline int cmd_reserve(const Scenario& sc, std::ostream& out) {
  out << "family,mode,n,k,reserve,guarantee,z_star,regular_above_reserve,certificate\n";
  const std::string fam = sc.family();
  if (sc.mode() == "unknown-n") {
    if (fam != "spa") throw ConfigError("unknown-n mode is defined for the spa family only");
    const Dist G = sc.G();
    const auto [p, value] = optimal_unknown_n_reserve(G);
    out << "spa,unknown-n,,2," << fmt(p) << "," << fmt(value) << "," << fmt(z_star(G.cdf_left(p)))
        << ",,guarantee for every n\n";
    return kOk;
  }
  if (sc.mode() != "known-n") throw ConfigError("mode must be \"known-n\" or \"unknown-n\"");
  const ReserveFamily family = sc.reserve_family();
  const AmbiguitySpec spec = sc.spec();
  const ReserveResult res = optimal_robust_reserve(spec, family);
  std::string cert;
  if (family.kind == ReserveFamily::Kind::PostedPrice && spec.k == 1) {
    cert = "optimal among all mechanisms";
  } else if (family.kind == ReserveFamily::Kind::SPA && res.regularity.regular_above_reserve) {
    cert = "optimal among all mechanisms";
  } else {
    cert = "robust guarantee only";
  }
  out << fam << ",known-n," << spec.n << "," << spec.k << "," << fmt(res.reserve) << "," << fmt(res.revenue) << ",,"
      << (res.regularity.regular_above_reserve ? "true" : "false") << "," << cert << "\n";
  return kOk;
}

inline int cmd_worstcase(const Scenario& sc, std::ostream& out) {
  const AmbiguitySpec spec = sc.spec();
  if (sc.family() == "myerson") {
    worst_case_revenue_topk(sc.mechanism(consistent_iid(spec)), spec);  // throws UnsupportedMechanism
  }
  Mechanism mech = SPAReserve{0.0};
  if (sc.reserve()) {
    mech = sc.mechanism(std::nullopt);
  } else {
    const ReserveFamily fam = sc.reserve_family();
    mech = fam.at(optimal_robust_reserve(spec, fam).reserve);
  }
  RevenueReport rep;
  rep.mechanism = describe(mech);
  rep.distribution = "worst case over n=" + std::to_string(spec.n) + ",k=" + std::to_string(spec.k) + "," + spec.G.label();
  rep.expected_revenue = worst_case_revenue_topk(mech, spec);
  out << RevenueReport::csv_header() << "\n" << rep.csv_row() << "\n";
  return kOk;
}

/// Revenue curve of the consistent i.i.d. distribution (k defaults to 2).
inline int cmd_curve(const Scenario& sc, std::ostream& out) {
  const AmbiguitySpec spec = sc.spec(2);
  const Dist fbar = consistent_iid(spec);
  const RevenueCurve curve = revenue_curve(fbar);
  const RegularityReport reg = is_regular_above_reserve(fbar);
  out << "quantile,price,revenue,ironed_revenue,above_reserve\n";
  for (const auto& k : curve.knots) {
    out << fmt(k.quantile) << "," << fmt(k.price) << "," << fmt(k.revenue) << "," << fmt(curve.ironed_revenue(k.quantile))
        << "," << (k.quantile <= reg.reserve_quantile + 1e-12 ? 1 : 0) << "\n";
  }
  return kOk;
}

namespace detail {

class CheckTable {
 public:
  explicit CheckTable(std::ostream& out) : out_(out) { out_ << "quantity,expected,computed,tolerance,status\n"; }

  void near(const std::string& name, double expected, double computed, double tol) {
    row(name, fmt(expected), computed, fmt(tol), std::abs(computed - expected) <= tol);
  }
  void check(const std::string& name, const std::string& expected, double computed, bool ok) {
    row(name, expected, computed, "", ok);
  }
  int code() const { return ok_ ? kOk : kCheckFailed; }

 private:
  void row(const std::string& name, const std::string& expected, double computed, const std::string& tol, bool ok) {
    out_ << name << "," << expected << "," << fmt(computed) << "," << tol << "," << (ok ? "pass" : "FAIL") << "\n";
    ok_ = ok_ && ok;
  }

  std::ostream& out_;
  bool ok_ = true;
};

}  // namespace detail

inline int cmd_reproduce(const std::string& name, const Settings& s, std::ostream& out) {
  if (name == "bernoulli-example") {
    detail::CheckTable t(out);
    const Dist G = Dist::two_point(0.0, 0.5, 1.0);
    const double z = z_star(0.5);
    t.near("z_star_residual", 0.0, z * (1.0 - std::log(z)) - 0.5, 1e-12);
    t.near("one_minus_z_star", 0.813, unknown_n_bound(1.0, G), 1e-3);
    return t.code();
  }
  if (name == "uniform-example") {
    detail::CheckTable t(out);
    const Dist G = Dist::uniform(0.0, 1.0, s.grid.value_or(kDefaultGrid));
    const auto [p, value] = optimal_unknown_n_reserve(G);
    t.near("z_star", 0.198, z_star(G.cdf_left(p)), 2e-3);
    t.near("reserve", 0.519, p, 2e-3);
    t.near("guarantee", 0.531, value, 2e-3);
    return t.code();
  }
  if (name == "counterexample") {
    const double q = s.q.value_or(0.8);
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0, 1)");
    detail::CheckTable t(out);
    const auto r = oracle::counterexample_certificate(q);
    t.near("opt_iid", 2.0 - q * q, r.opt_iid, 1e-9);
    t.near("opt_construction", 1.0 + std::sqrt(1.0 - 3 * q * q + 2 * q * q * q), r.opt_construction, 1e-9);
    t.near("second_stat_cdf_gap", 0.0, r.second_stat_gap, 1e-12);
    t.check("strict_gap", ">0", r.opt_iid - r.opt_construction, r.strict);
    t.check("regime_3q2_minus_2q3_ge_0.75", r.regime ? "true" : "false", r.regime ? 1.0 : 0.0, true);
    t.near("regime_threshold", 0.673, r.regime_threshold, 1e-3);
    return t.code();
  }
  if (name == "sandwich") {
    const double q = s.q.value_or(0.8);
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0, 1)");
    detail::CheckTable t(out);
    const Dist disc = Dist::two_point(1.0, q, 2.0);
    const AmbiguitySpec spec(3, 2, order_stat_dist(ProductDist::iid(disc, 3), 2));
    const Sandwich sw = robust_sandwich(spec);
    const double construction = 1.0 + std::sqrt(1.0 - 3 * q * q + 2 * q * q * q);
    t.near("upper", 2.0 - q * q, sw.upper, 1e-9);
    t.check("lower_le_upper", "<=upper", sw.lower, sw.lower <= sw.upper + 1e-12);
    t.check("lower_ge_half_upper", ">=upper/2", sw.lower, sw.lower >= 0.5 * sw.upper);
    t.check("construction_below_upper", "<upper", construction, construction < sw.upper);
    t.check("reserve", "", sw.reserve, true);
    return t.code();
  }
  throw ConfigError("unknown reproduction '" + name +
                    "'; expected bernoulli-example, uniform-example, counterexample or sandwich");
}

inline int cmd_simulate(const Scenario& sc, std::ostream& out) {
  if (!sc.seed) throw ConfigError("simulate needs an explicit seed (--seed or \"seed\" in the config)");
  const ProductDist pd(sc.profile());
  std::optional<Dist> base;
  if (all_components_equal(pd, pd[0])) base = pd[0];
  const Mechanism mech = sc.mechanism(base);
  if (const auto k = topk_class(mech); k && *k > pd.size() && !std::holds_alternative<PostedPrice>(mech)) {
    throw ConfigError("mechanism needs more bidders than the profile has");
  }
  const RevenueReport rep = mc_expected_revenue(mech, pd, sc.samples, *sc.seed);
  out << RevenueReport::csv_header() << "\n" << rep.csv_row() << "\n";
  return kOk;
}

/// Runs a command and maps failures to exit codes, with a message on `err`.
template <class F>
int guarded(F&& run, std::ostream& err) {
  try {
    return run();
  } catch (const UnsupportedMechanism& e) {
    err << "unsupported: " << e.what() << "\n";
    return kUnsupported;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::logic_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace robust_auction::cli
