// robust-auction: command-line front end. See README.md for the config format.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "robust_auction/cli.hpp"

namespace ra = robust_auction::cli;

int main(int argc, char** argv) {
  CLI::App app{"Robust auction design from a single known order statistic"};
  app.require_subcommand(1);

  ra::Settings settings;
  std::string out_path;
  std::string reproduce_name;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* cfg = cmd->add_option("--config", settings.config, "Scenario file (JSON)");
    if (needs_config) cfg->required();
    cmd->add_option("--out", out_path, "Write CSV here instead of stdout");
    cmd->add_option("--grid", settings.grid, "Knots for continuous distribution literals")->check(CLI::Range(2, 1 << 24));
  };

  auto* invert = app.add_subcommand("invert", "Consistent i.i.d. distribution of (n, k, G) with round-trip residuals");
  add_common(invert, true);
  auto* reserve = app.add_subcommand("reserve", "Robust reserve, guarantee and optimality certificate");
  add_common(reserve, true);
  auto* worstcase = app.add_subcommand("worstcase", "Worst-case revenue of a top-k mechanism");
  add_common(worstcase, true);
  auto* curve = app.add_subcommand("curve", "Revenue curve of the consistent i.i.d. distribution");
  add_common(curve, true);
  auto* reproduce = app.add_subcommand("reproduce", "Worked examples with expected values and pass/fail");
  add_common(reproduce, false);
  reproduce->add_option("name", reproduce_name, "bernoulli-example | uniform-example | counterexample | sandwich")
      ->required();
  reproduce->add_option("--q", settings.q, "Mass at the low value for counterexample and sandwich");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo revenue on an explicit product distribution");
  add_common(simulate, true);
  simulate->add_option("--seed", settings.seed, "Random seed (required here or in the config)");
  simulate->add_option("--samples", settings.samples, "Number of sampled profiles")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ra::kConfigError;
  }

  std::ostringstream buf;
  const int code = ra::guarded(
      [&] {
        if (*reproduce) return ra::cmd_reproduce(reproduce_name, settings, buf);
        const ra::Scenario sc = ra::Scenario::load(settings);
        if (*invert) return ra::cmd_invert(sc, buf);
        if (*reserve) return ra::cmd_reserve(sc, buf);
        if (*worstcase) return ra::cmd_worstcase(sc, buf);
        if (*curve) return ra::cmd_curve(sc, buf);
        return ra::cmd_simulate(sc, buf);
      },
      std::cerr);
  if (code == ra::kConfigError || code == ra::kUnsupported) return code;

  if (out_path.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write '" << out_path << "'\n";
      return ra::kConfigError;
    }
    f << buf.str();
  }
  return code;
}
