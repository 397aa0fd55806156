// symirk: command-line front end.
//
// Exit status: 0 success, 1 runtime failure, 2 configuration error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "symirk/commands.hpp"
#include "symirk/errors.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> problem;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> stages;
  std::optional<int> r;
  std::optional<std::string> mode;
  std::optional<std::string> variant;
  std::optional<std::string> h;
  std::optional<std::string> t_end;
  std::optional<std::int64_t> m;
  std::optional<int> P;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "manifest file");
  cmd->add_option("--problem", o.problem, "ncdp, cdp or oss (published parameters unless --config is given)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "ensemble seed");
  cmd->add_option("--stages", o.stages, "number of Gauss stages");
  cmd->add_option("--step", o.h, "step size, exact expression such as 2^-7 or 500/3");
  cmd->add_option("--t-end", o.t_end, "integration horizon, exact expression");
  cmd->add_option("--m", o.m, "steps between samples");
}

symirk::RunManifest resolve(const Overrides& o) {
  using symirk::RunManifest;
  RunManifest m;
  if (!o.config.empty()) {
    m = symirk::read_manifest(o.config);
  } else if (o.problem) {
    m = symirk::published_manifest(*o.problem);
  }
  if (o.problem) m.problem = *o.problem;
  if (o.out) m.out_dir = *o.out;
  if (o.seed) m.seed = *o.seed;
  if (o.stages) m.stages = *o.stages;
  if (o.r) m.r = *o.r;
  if (o.mode) {
    try {
      m.estimator_mode = symirk::parse_estimator_mode(*o.mode);
    } catch (const symirk::Error& e) {
      throw symirk::ConfigError("estimator.mode", e.what());
    }
  }
  if (o.variant) m.oracle_variant = *o.variant;
  if (o.h) m.h_text = *o.h;
  if (o.t_end) m.t_end_text = *o.t_end;
  if (o.m) m.m = *o.m;
  if (o.P) m.P = *o.P;
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symplectic implicit Runge-Kutta integration with controlled round-off"};
  app.require_subcommand(1);

  std::size_t coeff_stages = 6;
  bool hex = false;
  auto* coeffs = app.add_subcommand("coeffs", "print the machine tableau");
  coeffs->add_option("--stages", coeff_stages, "number of Gauss stages");
  coeffs->add_flag("--hex", hex, "exact hexadecimal literals");

  Overrides integrate_o, estimate_o, ensemble_o, decompose_o;
  auto* integrate = app.add_subcommand("integrate", "integrate and write the trajectory");
  add_run_options(integrate, integrate_o);

  auto* estimate = app.add_subcommand("estimate", "integrate with the round-off error estimate");
  add_run_options(estimate, estimate_o);
  estimate->add_option("--r", estimate_o.r, "mantissa bits dropped by the secondary integration");
  estimate->add_option("--mode", estimate_o.mode, "parallel or sequential");

  auto* ensemble = app.add_subcommand("ensemble", "perturbed-ensemble round-off statistics");
  add_run_options(ensemble, ensemble_o);
  ensemble->add_option("--P", ensemble_o.P, "ensemble size");

  auto* decompose = app.add_subcommand("decompose", "extended-precision reference run");
  add_run_options(decompose, decompose_o);
  decompose->add_option("--variant", decompose_o.variant, "A, B, C, D or fpiea");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const symirk::CommandLog log{std::cerr, symirk::verbosity_from_env()};
  try {
    if (*coeffs) return symirk::cmd_coeffs(coeff_stages, hex, std::cout) ? 0 : 1;
    if (*integrate) symirk::cmd_integrate(resolve(integrate_o), log);
    if (*estimate) {
      symirk::RunManifest m = resolve(estimate_o);
      if (m.estimator_mode == symirk::EstimatorMode::Off && !estimate_o.mode && estimate_o.config.empty()) {
        m.estimator_mode = symirk::EstimatorMode::Parallel;
      }
      symirk::cmd_estimate(m, log);
    }
    if (*ensemble) symirk::cmd_ensemble(resolve(ensemble_o), log);
    if (*decompose) symirk::cmd_decompose(resolve(decompose_o), log);
  } catch (const symirk::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
