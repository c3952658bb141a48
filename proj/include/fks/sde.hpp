#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fks/freeknot.hpp"
#include "fks/paths.hpp"

namespace fks {

/// dX(t) = a(t, X(t)) dt + sigma(t) dW(t) on [0, 1].
struct AdditiveNoiseSde {
  std::string name;
  std::function<double(double, double)> drift;  // a(t, x)
  std::function<double(double)> diffusion;      // sigma(t)
  /// X(0), drawn from a stream derived from (not equal to) the path's seed.
  std::function<double(SeedSpec)> initial_value;
  std::string lipschitz_note;
};

/// Validates sigma(t) != 0 on a dense grid of [0, 1]; throws ConfigError otherwise.
AdditiveNoiseSde make_sde(std::string name, std::function<double(double, double)> drift,
                          std::function<double(double)> diffusion,
                          std::function<double(SeedSpec)> initial_value,
                          std::string lipschitz_note = {});

/// Registered presets: bm, ou, ramp-sigma, time-drift. Throws ConfigError for other names.
AdditiveNoiseSde sde_preset(std::string_view name);
const std::vector<std::string>& preset_names();

/// ||sigma||_2 on [0, 1] by adaptive Gauss-Kronrod quadrature (tolerance 1e-10).
double sigma_l2_norm(const AdditiveNoiseSde& sde);
/// sup |sigma| on [0, 1] from a dense grid.
double sigma_sup_norm(const AdditiveNoiseSde& sde);

/// Euler recursion on the full fine grid, driven by the increments of `w`.
/// Serves as the ground-truth surrogate for the strong solution.
SamplePath reference_solution(const AdditiveNoiseSde& sde, const SamplePath& w, double x0);

/// n_k = floor(k^delta), delta in (1/2, 1).
Index coarse_steps(Index k, double delta);

/// Fine-grid index nearest to l * M / n.
Index snap_coarse_index(Index l, Index n, Index fine_steps);

struct CoarseScheme {
  Index n = 0;
  std::vector<Index> indices;    // fine-grid index of t_l, l = 0..n
  Eigen::VectorXd times;         // t_l, l = 0..n
  Eigen::VectorXd euler_values;  // Euler approximation at t_l, l = 0..n
  Eigen::VectorXd sigma_values;  // sigma(t_l), l = 0..n-1
};

/// Euler scheme with n coarse steps on snapped times.
CoarseScheme euler_coarse(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index n);

/// Euler scheme with n = floor(k^delta) steps.
CoarseScheme euler_coarse(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index k,
                          double delta);

struct KnotBudget {
  Index k = 0;
  Index n = 0;
  std::vector<Index> m;  // pieces per coarse cell
  double delta = 0.0;

  /// n + 1 + sum(m_l - 1)
  Index total_knots() const;
};

/// m_l = floor(sigma_l^2 / sum sigma_i^2 * (k - n)) + 1.
KnotBudget knot_budget(const Eigen::VectorXd& sigma_values, Index k, Index n);
/// Same rule with sigma_l^2 given directly.
KnotBudget knot_budget_from_squares(const Eigen::VectorXd& sigma_squares, Index k, Index n);

/// m_l = floor((k - n) / n) + 1 for every cell.
KnotBudget uniform_budget(Index k, Index n);

/// Result of a coarse-Euler-plus-spline method.
struct CompositeApprox {
  FreeKnotSpline spline;
  CoarseScheme coarse;
  KnotBudget budget;
  /// Per cell: max over grid points of ]t_l, t_{l+1}] of |W^l - spline of W^l|.
  std::vector<double> cell_errors;
  std::vector<GammaResult> cell_gammas;
};

/// Euler on the coarse grid plus a sigma^2-proportional free-knot budget per cell.
CompositeApprox build_dagger(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index k,
                             double delta, int r, double rel_tol = kDefaultGammaRelTol);

/// Same construction with an equal budget in every cell.
CompositeApprox build_star(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index k,
                           double delta, int r, double rel_tol = kDefaultGammaRelTol);

/// Composition for an arbitrary budget; build_dagger/build_star forward here.
CompositeApprox build_composite(const AdditiveNoiseSde& sde, const SamplePath& w, double x0,
                                const CoarseScheme& coarse, const KnotBudget& budget, int r,
                                double rel_tol = kDefaultGammaRelTol);

/// Piecewise-linear interpolation of the Euler scheme with step 1/k.
FreeKnotSpline build_euler_interp(const AdditiveNoiseSde& sde, const SamplePath& w, double x0,
                                  Index k);

/// Euler values at the coarse times joined by frozen-coefficient dynamics in between.
SamplePath xbar_process(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index n);

}  // namespace fks
