#include "fks/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "fks/errors.hpp"
#include "fks/parallel.hpp"
#include "fks/stats.hpp"

namespace fks {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "dagger") return Method::dagger;
  if (name == "star") return Method::star;
  if (name == "euler") return Method::euler;
  if (name == "min" || name == "dagger-as-min-surrogate") return Method::min_surrogate;
  throw ConfigError("unknown method '" + std::string(name) + "' (dagger, star, euler, min)");
}

std::string method_tag(Method m) {
  switch (m) {
    case Method::dagger:
      return "dagger";
    case Method::star:
      return "star";
    case Method::euler:
      return "euler";
    case Method::min_surrogate:
      return "dagger-as-min-surrogate";
  }
  return "unknown";
}

TauStats tau_stats(int r, const XiSamples& samples) {
  const double rate = samples.censoring_rate();
  if (rate >= 0.01) {
    throw EstimatorError("tau_{1,1} censoring rate " + fmt(rate) +
                         " is at least 1%; raise the horizon cap (cap_factor)");
  }
  TauStats out;
  out.r = r;
  out.n_samples = static_cast<Index>(samples.values.size());
  out.censoring_rate = rate;
  const double scale = 1.0 / (samples.epsilon * samples.epsilon);
  std::vector<double> powered(samples.values.size());
  for (int m = 1; m <= 4; ++m) {
    for (std::size_t i = 0; i < powered.size(); ++i) {
      powered[i] = std::pow(samples.values[i] * scale, m);
    }
    out.moments[static_cast<std::size_t>(m - 1)] = sample_mean(powered);
    out.std_errors[static_cast<std::size_t>(m - 1)] = jackknife_mean_se(powered);
  }
  return out;
}

TauStats estimate_tau_moments(int r, Index n, const XiGrid& grid, std::uint64_t master_seed,
                              unsigned threads, std::uint64_t domain) {
  if (n < 100) throw ConfigError("tau moment estimation needs at least 100 samples");
  const XiSamples s =
      xi_samples(r, 1.0, n, grid, master_seed, stream_domain::stream(domain, 0), threads);
  return tau_stats(r, s);
}

double range_exit_time(double eps, const XiGrid& grid, SeedSpec seed, bool* censored) {
  const double step = eps * eps * grid.initial_horizon / static_cast<double>(grid.steps);
  const auto cap = static_cast<Index>(std::llround(grid.cap_factor * static_cast<double>(grid.steps)));
  WienerStream stream(seed, step);
  double w = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (Index i = 1; i <= cap; ++i) {
    w += stream.next_increment();
    lo = std::min(lo, w);
    hi = std::max(hi, w);
    if (hi - lo > 2.0 * eps) {
      if (censored != nullptr) *censored = false;
      return static_cast<double>(i - 1) * step;
    }
  }
  if (censored != nullptr) *censored = true;
  return static_cast<double>(cap) * step;
}

XiSamples range_exit_samples(double eps, Index n, const XiGrid& grid, std::uint64_t master_seed,
                             std::uint64_t stream_base, unsigned threads) {
  XiSamples out;
  out.epsilon = eps;
  out.values.resize(static_cast<std::size_t>(n));
  out.censored.resize(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](Index i) {
    bool cens = false;
    const SeedSpec seed{master_seed, stream_base + static_cast<std::uint64_t>(i)};
    out.values[static_cast<std::size_t>(i)] = range_exit_time(eps, grid, seed, &cens);
    out.censored[static_cast<std::size_t>(i)] = cens ? 1 : 0;
  });
  return out;
}

double pathwise_error(Method method, const AdditiveNoiseSde& sde, const SamplePath& w,
                      const SamplePath& reference, double x0, Index k,
                      const SimulationSpec& spec) {
  switch (method) {
    case Method::dagger:
    case Method::min_surrogate:
      return grid_sup_distance(
          build_dagger(sde, w, x0, k, spec.delta, spec.r, spec.gamma_rel_tol).spline, reference);
    case Method::star:
      return grid_sup_distance(
          build_star(sde, w, x0, k, spec.delta, spec.r, spec.gamma_rel_tol).spline, reference);
    case Method::euler:
      return grid_sup_distance(build_euler_interp(sde, w, x0, k), reference);
  }
  throw ConfigError("unknown method");
}

std::vector<ErrorSamples> sample_errors(const AdditiveNoiseSde& sde,
                                        const std::vector<Method>& methods,
                                        const std::vector<Index>& ks, Index n_paths,
                                        const SimulationSpec& spec) {
  if (n_paths < 1) throw ConfigError("need at least one path");
  std::vector<ErrorSamples> out;
  for (Method m : methods) {
    for (Index k : ks) {
      out.push_back({m, k, std::vector<double>(static_cast<std::size_t>(n_paths))});
    }
  }
  const FineGrid grid(spec.grid_steps);
  parallel_for(n_paths, spec.threads, [&](Index i) {
    const auto ui = static_cast<std::uint64_t>(i);
    const SamplePath w =
        sample_wiener(grid, {spec.master_seed, stream_domain::stream(stream_domain::kWiener, ui)});
    const double x0 = sde.initial_value({spec.master_seed, ui});
    const SamplePath reference = reference_solution(sde, w, x0);
    for (std::size_t c = 0; c < out.size(); ++c) {
      // dagger and its surrogate tag share one computation per path
      std::optional<double> reused;
      if (out[c].method == Method::min_surrogate) {
        for (std::size_t d = 0; d < c; ++d) {
          if (out[d].method == Method::dagger && out[d].k == out[c].k) {
            reused = out[d].errors[static_cast<std::size_t>(i)];
          }
        }
      }
      out[c].errors[static_cast<std::size_t>(i)] =
          reused ? *reused : pathwise_error(out[c].method, sde, w, reference, x0, out[c].k, spec);
    }
  });
  return out;
}

ErrorEstimate summarize_errors(const ErrorSamples& samples, double q) {
  ErrorEstimate e;
  e.method = method_tag(samples.method);
  e.k = samples.k;
  e.q = q;
  e.n_paths = static_cast<Index>(samples.errors.size());
  e.e_q_hat = power_mean(samples.errors, q);
  e.std_error = power_mean_se(samples.errors, q);
  e.scaled = std::sqrt(static_cast<double>(samples.k)) * e.e_q_hat;
  return e;
}

ErrorEstimate estimate_eq(Method method, const AdditiveNoiseSde& sde, Index k, double q,
                          Index n_paths, const SimulationSpec& spec) {
  return summarize_errors(sample_errors(sde, {method}, {k}, n_paths, spec).front(), q);
}

double predicted_constant(Method method, const AdditiveNoiseSde& sde, double tau_mean, Index k) {
  switch (method) {
    case Method::dagger:
    case Method::min_surrogate:
      return sigma_l2_norm(sde) / std::sqrt(tau_mean);
    case Method::star:
      return sigma_sup_norm(sde) / std::sqrt(tau_mean);
    case Method::euler:
      return sigma_sup_norm(sde) / std::sqrt(2.0) * std::sqrt(std::log(static_cast<double>(k)));
  }
  return 0.0;
}

std::vector<ConvergenceRow> convergence_rows(const AdditiveNoiseSde& sde,
                                             const std::vector<ErrorSamples>& samples,
                                             const std::vector<double>& qs, double tau_mean) {
  std::vector<ConvergenceRow> rows;
  for (const ErrorSamples& s : samples) {
    for (double q : qs) {
      ConvergenceRow row;
      row.estimate = summarize_errors(s, q);
      row.predicted_constant = predicted_constant(s.method, sde, tau_mean, s.k);
      row.ratio = row.estimate.scaled / row.predicted_constant;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<CompareRow> compare_rows(const AdditiveNoiseSde& sde,
                                     const std::vector<ErrorSamples>& samples,
                                     const std::vector<double>& qs, double tau_mean) {
  std::vector<CompareRow> rows;
  if (samples.empty()) return rows;
  const Method first = samples.front().method;
  for (const ErrorSamples& a : samples) {
    if (a.method != first) continue;
    for (const ErrorSamples& b : samples) {
      if (b.method == first || b.k != a.k) continue;
      for (double q : qs) {
        CompareRow row;
        row.method_a = method_tag(a.method);
        row.method_b = method_tag(b.method);
        row.k = a.k;
        row.q = q;
        row.n_paths = static_cast<Index>(a.errors.size());
        row.e_q_a = power_mean(a.errors, q);
        row.e_q_b = power_mean(b.errors, q);
        row.ratio = row.e_q_a / row.e_q_b;
        row.predicted_ratio = predicted_constant(a.method, sde, tau_mean, a.k) /
                              predicted_constant(b.method, sde, tau_mean, b.k);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<GammaRow> gamma_study(const std::vector<Index>& ks, Index n_paths,
                                  const SimulationSpec& spec, double tau_mean) {
  if (n_paths < 1) throw ConfigError("need at least one path");
  const FineGrid grid(spec.grid_steps);
  std::vector<std::vector<double>> gammas(ks.size(),
                                          std::vector<double>(static_cast<std::size_t>(n_paths)));
  parallel_for(n_paths, spec.threads, [&](Index i) {
    const auto ui = static_cast<std::uint64_t>(i);
    const SamplePath w =
        sample_wiener(grid, {spec.master_seed, stream_domain::stream(stream_domain::kWiener, ui)});
    for (std::size_t j = 0; j < ks.size(); ++j) {
      gammas[j][static_cast<std::size_t>(i)] =
          gamma_k(w, 0, grid.steps(), ks[j], spec.r, spec.gamma_rel_tol).gamma;
    }
  });
  std::vector<GammaRow> rows;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    GammaRow row;
    row.k = ks[j];
    row.r = spec.r;
    row.n_paths = n_paths;
    row.median_gamma = median(gammas[j]);
    row.scaled_median = row.median_gamma * std::sqrt(tau_mean * static_cast<double>(ks[j]));
    rows.push_back(row);
  }
  return rows;
}

void validate(const RunConfig& c) {
  static const std::vector<std::string> commands{"tau", "gamma", "converge", "compare"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end()) {
    throw ConfigError("unknown command '" + c.command + "'");
  }
  sde_preset(c.sde);
  if (c.methods.empty()) throw ConfigError("method list is empty");
  for (const auto& m : c.methods) parse_method(m);
  if (c.command == "compare" && c.methods.size() < 2) {
    throw ConfigError("compare needs at least two methods");
  }
  if (c.ks.empty()) throw ConfigError("k list is empty");
  for (std::size_t i = 0; i < c.ks.size(); ++i) {
    if (c.ks[i] < 1) throw ConfigError("k must be >= 1");
    if (i > 0 && c.ks[i] <= c.ks[i - 1]) throw ConfigError("k list must be increasing");
  }
  if (c.qs.empty()) throw ConfigError("q list is empty");
  for (double q : c.qs) {
    if (!(q >= 1.0 && q <= 4.0)) throw ConfigError("q must lie in [1, 4], got " + fmt(q));
  }
  if (c.degree < 0 || c.degree > 8) throw ConfigError("degree must lie in [0, 8]");
  if (!(c.delta > 0.5 && c.delta < 1.0)) throw ConfigError("delta must lie in (1/2, 1)");
  if (c.grid_exp < 1 || c.grid_exp > 26) throw ConfigError("grid exponent must lie in [1, 26]");
  if (c.tau_grid_exp < 4 || c.tau_grid_exp > 24) {
    throw ConfigError("tau grid exponent must lie in [4, 24]");
  }
  if (c.paths < 1) throw ConfigError("paths must be >= 1");
  if (c.command == "tau" && c.paths < 100) throw ConfigError("tau needs --paths >= 100");
  if (c.tau_paths < 100) throw ConfigError("tau paths must be >= 100");
  if (!(c.gamma_rel_tol > 0.0 && c.gamma_rel_tol < 1.0)) {
    throw ConfigError("gamma rel_tol must lie in (0, 1)");
  }
  if (c.out.empty()) throw ConfigError("--out is required");
  if (c.command == "converge" || c.command == "compare") {
    const Index m = Index{1} << c.grid_exp;
    for (Index k : c.ks) {
      for (const auto& name : c.methods) {
        const Method method = parse_method(name);
        if (method == Method::euler) {
          if (k > m) throw ConfigError("euler needs k <= M");
        } else if (coarse_steps(k, c.delta) >= k || coarse_steps(k, c.delta) > m) {
          throw ConfigError("k = " + std::to_string(k) + " leaves no free knots for delta " +
                            fmt(c.delta));
        }
      }
    }
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{{"command", c.command},
                        {"sde", c.sde},
                        {"methods", c.methods},
                        {"k", c.ks},
                        {"q", c.qs},
                        {"degree", c.degree},
                        {"delta", c.delta},
                        {"grid_exp", c.grid_exp},
                        {"paths", c.paths},
                        {"seed", c.seed},
                        {"out", c.out},
                        {"tau_paths", c.tau_paths},
                        {"tau_grid_exp", c.tau_grid_exp},
                        {"gamma_rel_tol", c.gamma_rel_tol},
                        {"library_version", kLibraryVersion}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.command = j.value("command", c.command);
    c.sde = j.value("sde", c.sde);
    c.methods = j.value("methods", c.methods);
    c.ks = j.value("k", c.ks);
    c.qs = j.value("q", c.qs);
    c.degree = j.value("degree", c.degree);
    c.delta = j.value("delta", c.delta);
    c.grid_exp = j.value("grid_exp", c.grid_exp);
    c.paths = j.value("paths", c.paths);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.tau_paths = j.value("tau_paths", c.tau_paths);
    c.tau_grid_exp = j.value("tau_grid_exp", c.tau_grid_exp);
    c.gamma_rel_tol = j.value("gamma_rel_tol", c.gamma_rel_tol);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
  return c;
}

SimulationSpec simulation_spec(const RunConfig& c) {
  SimulationSpec s;
  s.grid_steps = Index{1} << c.grid_exp;
  s.delta = c.delta;
  s.r = c.degree;
  s.gamma_rel_tol = c.gamma_rel_tol;
  s.master_seed = c.seed;
  s.threads = c.threads;
  return s;
}

XiGrid tau_grid(const RunConfig& c) {
  XiGrid g;
  g.steps = Index{1} << c.tau_grid_exp;
  return g;
}

void write_tau_csv(std::ostream& os, const TauStats& s) {
  os << "r,n_samples,m,estimate,std_error,censoring_rate\n";
  for (int m = 1; m <= 4; ++m) {
    const auto um = static_cast<std::size_t>(m - 1);
    os << s.r << ',' << s.n_samples << ',' << m << ',' << fmt(s.moments[um]) << ','
       << fmt(s.std_errors[um]) << ',' << fmt(s.censoring_rate) << '\n';
  }
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "method,k,q,n_paths,e_q_hat,std_error,sqrt_k_times_eq,predicted_constant,ratio\n";
  for (const auto& r : rows) {
    const ErrorEstimate& e = r.estimate;
    os << e.method << ',' << e.k << ',' << fmt(e.q) << ',' << e.n_paths << ',' << fmt(e.e_q_hat)
       << ',' << fmt(e.std_error) << ',' << fmt(e.scaled) << ',' << fmt(r.predicted_constant)
       << ',' << fmt(r.ratio) << '\n';
  }
}

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows) {
  os << "method_a,method_b,k,q,n_paths,e_q_a,e_q_b,ratio,predicted_ratio\n";
  for (const auto& r : rows) {
    os << r.method_a << ',' << r.method_b << ',' << r.k << ',' << fmt(r.q) << ',' << r.n_paths
       << ',' << fmt(r.e_q_a) << ',' << fmt(r.e_q_b) << ',' << fmt(r.ratio) << ','
       << fmt(r.predicted_ratio) << '\n';
  }
}

void write_gamma_csv(std::ostream& os, const std::vector<GammaRow>& rows) {
  os << "k,r,n_paths,median_gamma,scaled_median\n";
  for (const auto& r : rows) {
    os << r.k << ',' << r.r << ',' << r.n_paths << ',' << fmt(r.median_gamma) << ','
       << fmt(r.scaled_median) << '\n';
  }
}

CommandResult run_command(const RunConfig& config) {
  validate(config);
  std::ostringstream csv;
  std::ostringstream summary;
  if (config.command == "tau") {
    XiGrid grid;
    grid.steps = Index{1} << config.grid_exp;
    const TauStats s =
        estimate_tau_moments(config.degree, config.paths, grid, config.seed, config.threads);
    write_tau_csv(csv, s);
    summary << "tau r=" << s.r << " n=" << s.n_samples << " E(tau)=" << fmt(s.mean())
            << " +- " << fmt(s.mean_se()) << " censored=" << fmt(s.censoring_rate);
    return {csv.str(), summary.str()};
  }

  std::vector<Method> methods;
  for (const auto& m : config.methods) methods.push_back(parse_method(m));
  const bool needs_tau =
      config.command == "gamma" ||
      std::any_of(methods.begin(), methods.end(), [](Method m) { return m != Method::euler; });
  const double tau_mean =
      needs_tau ? estimate_tau_moments(config.degree, config.tau_paths, tau_grid(config),
                                       config.seed, config.threads)
                      .mean()
                : 0.0;
  const SimulationSpec spec = simulation_spec(config);
  if (config.command == "gamma") {
    const auto rows = gamma_study(config.ks, config.paths, spec, tau_mean);
    write_gamma_csv(csv, rows);
    summary << "gamma r=" << config.degree << " paths=" << config.paths
            << " scaled median at k=" << rows.back().k << ": " << fmt(rows.back().scaled_median);
    return {csv.str(), summary.str()};
  }

  const AdditiveNoiseSde sde = sde_preset(config.sde);
  const auto samples = sample_errors(sde, methods, config.ks, config.paths, spec);
  if (config.command == "converge") {
    const auto rows = convergence_rows(sde, samples, config.qs, tau_mean);
    write_convergence_csv(csv, rows);
    summary << "converge " << config.sde << ": " << rows.size() << " rows, last ratio "
            << fmt(rows.back().ratio);
  } else {
    const auto rows = compare_rows(sde, samples, config.qs, tau_mean);
    write_compare_csv(csv, rows);
    summary << "compare " << config.sde << ": " << rows.size() << " rows, last ratio "
            << fmt(rows.back().ratio) << " (predicted " << fmt(rows.back().predicted_ratio) << ")";
  }
  return {csv.str(), summary.str()};
}

}  // namespace fks
