#include "fks/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "fks/errors.hpp"
#include "fks/harness.hpp"

namespace fks {

namespace {

struct Flags {
  RunConfig values;
  std::string config_path;
  std::string echo_path;
  // applied on top of a --config file, for flags given explicitly
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;
};

template <class T>
void add_flag(CLI::App& app, Flags& f, const std::string& name, T RunConfig::*field,
              const std::string& help) {
  CLI::Option* opt = app.add_option(name, f.values.*field, help);
  if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
    opt->delimiter(',');
  }
  f.overrides.emplace_back(opt, [&f, field](RunConfig& c) { c.*field = f.values.*field; });
}

void add_common(CLI::App& app, Flags& f) {
  add_flag(app, f, "--degree,-r", &RunConfig::degree, "polynomial degree bound r");
  add_flag(app, f, "--paths", &RunConfig::paths, "number of Monte Carlo paths");
  add_flag(app, f, "--grid-exp", &RunConfig::grid_exp, "fine grid has 2^grid_exp steps");
  add_flag(app, f, "--seed", &RunConfig::seed, "master seed");
  add_flag(app, f, "--out", &RunConfig::out, "output CSV path");
  add_flag(app, f, "--tau-paths", &RunConfig::tau_paths, "samples for the E(tau_{1,1}) estimate");
  add_flag(app, f, "--tau-grid-exp", &RunConfig::tau_grid_exp,
           "first-exit grid has 2^exp steps per 8 eps^2");
  add_flag(app, f, "--rel-tol", &RunConfig::gamma_rel_tol, "relative bisection tolerance for gamma_k");
  app.add_option("--threads", f.values.threads, "worker threads, 0 = auto (never changes output)");
  app.add_option("--config", f.config_path, "JSON config; explicit flags override it");
  app.add_option("--echo-config", f.echo_path, "write the effective config as JSON here");
}

void add_study(CLI::App& app, Flags& f) {
  add_flag(app, f, "--k", &RunConfig::ks, "increasing knot budgets, comma separated");
}

void add_sde(CLI::App& app, Flags& f) {
  add_flag(app, f, "--sde", &RunConfig::sde, "preset: bm, ou, ramp-sigma, time-drift");
  add_flag(app, f, "--method", &RunConfig::methods, "dagger, star, euler, min (comma separated)");
  add_flag(app, f, "--q", &RunConfig::qs, "moment orders in [1, 4]");
  add_flag(app, f, "--delta", &RunConfig::delta, "coarse grid exponent in (1/2, 1)");
}

RunConfig effective_config(const Flags& f, const std::string& command) {
  RunConfig c = f.values;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot read config file " + f.config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + f.config_path + ": " + e.what());
    }
    c = run_config_from_json(j);
    for (const auto& [opt, apply] : f.overrides) {
      if (opt->count() > 0) apply(c);
    }
    c.threads = f.values.threads;
  }
  c.command = command;
  return c;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Free-knot spline approximation of SDEs with additive noise", "fks"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* tau = app.add_subcommand("tau", "moments of tau_{1,1}");
  CLI::App* gamma = app.add_subcommand("gamma", "median pathwise minimal error gamma_k");
  CLI::App* converge = app.add_subcommand("converge", "q-average errors against the asymptotic constants");
  CLI::App* compare = app.add_subcommand("compare", "error ratios of the first method to the others");
  for (CLI::App* sub : {tau, gamma, converge, compare}) add_common(*sub, flags);
  for (CLI::App* sub : {gamma, converge, compare}) add_study(*sub, flags);
  for (CLI::App* sub : {converge, compare}) add_sde(*sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig config = effective_config(flags, command);
    validate(config);
    if (!flags.echo_path.empty()) {
      std::ofstream echo(flags.echo_path, std::ios::binary);
      if (!echo) throw ConfigError("cannot write " + flags.echo_path);
      echo << to_json(config).dump(2) << '\n';
    }
    const CommandResult result = run_command(config);
    std::ofstream file(config.out, std::ios::binary);
    if (!file) throw ConfigError("cannot write output file " + config.out);
    file << result.csv;
    if (!file.flush()) throw std::runtime_error("failed writing " + config.out);
    out << result.summary << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fks
