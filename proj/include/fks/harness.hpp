#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fks/freeknot.hpp"
#include "fks/sde.hpp"

namespace fks {

inline constexpr const char* kLibraryVersion = "1.0.0";

enum class Method { dagger, star, euler, min_surrogate };

/// Accepts dagger, star, euler and min (or its full tag); throws ConfigError otherwise.
Method parse_method(std::string_view name);
/// CSV tag: dagger, star, euler or dagger-as-min-surrogate.
std::string method_tag(Method m);

struct TauStats {
  int r = 0;
  Index n_samples = 0;
  std::array<double, 4> moments{};     // E(tau^m), m = 1..4
  std::array<double, 4> std_errors{};  // jackknife
  double censoring_rate = 0.0;

  double mean() const { return moments[0]; }
  double mean_se() const { return std_errors[0]; }
};

/// Moments of tau_{1,1} from first-exit samples; throws EstimatorError when
/// 1% or more of the samples are censored.
TauStats tau_stats(int r, const XiSamples& samples);

/// tau_{1,1} moments from n fresh paths on streams of `domain`.
TauStats estimate_tau_moments(int r, Index n, const XiGrid& grid, std::uint64_t master_seed,
                              unsigned threads = 1,
                              std::uint64_t domain = stream_domain::kTau);

/// First grid time at which the running range of a fresh path exceeds 2 eps.
/// Plain min/max scan, independent of the minimax code.
double range_exit_time(double eps, const XiGrid& grid, SeedSpec seed, bool* censored);

XiSamples range_exit_samples(double eps, Index n, const XiGrid& grid, std::uint64_t master_seed,
                             std::uint64_t stream_base, unsigned threads = 1);

struct ErrorEstimate {
  std::string method;
  Index k = 0;
  double q = 1.0;
  Index n_paths = 0;
  double e_q_hat = 0.0;
  double std_error = 0.0;
  double scaled = 0.0;  // sqrt(k) * e_q_hat
};

/// Pathwise sup errors of one method at one budget.
struct ErrorSamples {
  Method method = Method::dagger;
  Index k = 0;
  std::vector<double> errors;
};

struct SimulationSpec {
  Index grid_steps = Index{1} << 20;
  double delta = 0.75;
  int r = 0;
  double gamma_rel_tol = kDefaultGammaRelTol;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
};

/// Sup distance on the fine grid between the reference solution and the method's spline.
double pathwise_error(Method method, const AdditiveNoiseSde& sde, const SamplePath& w,
                      const SamplePath& reference, double x0, Index k, const SimulationSpec& spec);

/// Errors for every (method, k) pair on the same n_paths Brownian paths.
std::vector<ErrorSamples> sample_errors(const AdditiveNoiseSde& sde,
                                        const std::vector<Method>& methods,
                                        const std::vector<Index>& ks, Index n_paths,
                                        const SimulationSpec& spec);

ErrorEstimate summarize_errors(const ErrorSamples& samples, double q);

ErrorEstimate estimate_eq(Method method, const AdditiveNoiseSde& sde, Index k, double q,
                          Index n_paths, const SimulationSpec& spec);

/// Asymptotic constant of sqrt(k) * e_q. For euler it includes the sqrt(ln k) factor.
double predicted_constant(Method method, const AdditiveNoiseSde& sde, double tau_mean, Index k);

struct ConvergenceRow {
  ErrorEstimate estimate;
  double predicted_constant = 0.0;
  double ratio = 0.0;
};

std::vector<ConvergenceRow> convergence_rows(const AdditiveNoiseSde& sde,
                                             const std::vector<ErrorSamples>& samples,
                                             const std::vector<double>& qs, double tau_mean);

struct CompareRow {
  std::string method_a;
  std::string method_b;
  Index k = 0;
  double q = 1.0;
  Index n_paths = 0;
  double e_q_a = 0.0;
  double e_q_b = 0.0;
  double ratio = 0.0;
  double predicted_ratio = 0.0;
};

/// The first method against each of the others, for every k and q.
std::vector<CompareRow> compare_rows(const AdditiveNoiseSde& sde,
                                     const std::vector<ErrorSamples>& samples,
                                     const std::vector<double>& qs, double tau_mean);

struct GammaRow {
  Index k = 0;
  int r = 0;
  Index n_paths = 0;
  double median_gamma = 0.0;
  double scaled_median = 0.0;  // median_gamma * sqrt(tau_mean * k)
};

/// gamma_k of n_paths Brownian paths on [0, 1] for every k.
std::vector<GammaRow> gamma_study(const std::vector<Index>& ks, Index n_paths,
                                  const SimulationSpec& spec, double tau_mean);

struct RunConfig {
  std::string command;
  std::string sde = "ou";
  std::vector<std::string> methods{"dagger"};
  std::vector<Index> ks{64, 128, 256, 512};
  std::vector<double> qs{1.0};
  int degree = 0;
  double delta = 0.75;
  int grid_exp = 20;
  Index paths = 500;
  std::uint64_t seed = 1;
  std::string out;
  Index tau_paths = 20000;
  int tau_grid_exp = 18;
  double gamma_rel_tol = kDefaultGammaRelTol;
  unsigned threads = 1;
};

/// Range checks; throws ConfigError with the offending field.
void validate(const RunConfig& config);

/// threads is left out: it never changes results.
nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

SimulationSpec simulation_spec(const RunConfig& config);
XiGrid tau_grid(const RunConfig& config);

void write_tau_csv(std::ostream& os, const TauStats& stats);
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);
void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows);
void write_gamma_csv(std::ostream& os, const std::vector<GammaRow>& rows);

/// Runs one subcommand end to end and returns the CSV text plus a one-line summary.
struct CommandResult {
  std::string csv;
  std::string summary;
};
CommandResult run_command(const RunConfig& config);

}  // namespace fks
