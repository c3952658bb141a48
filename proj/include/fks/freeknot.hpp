#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fks/minimax.hpp"
#include "fks/paths.hpp"

namespace fks {

/// Greedy stopping indices at level epsilon on a closed grid interval.
///
/// Piece j covers [taus[j-1], taus[j]]; consecutive pieces share their
/// boundary index. taus[j] is the last index at which the piece error is
/// still <= epsilon, so every stored piece meets the bound on the grid.
struct StoppingSequence {
  double epsilon = 0.0;
  std::vector<Index> taus;
  bool exhausted = false;  // the last piece ends at the right endpoint with error <= epsilon
  Index floored = 0;       // pieces forced to a single grid step although they exceed epsilon

  Index pieces() const noexcept { return static_cast<Index>(taus.size()) - 1; }
};

StoppingSequence stopping_times(const SamplePath& path, Index left, Index right, double eps,
                                int r);

/// Number of greedy pieces at level eps, giving up once `limit` is exceeded.
struct PieceCount {
  Index pieces = 0;
  bool floored = false;
  bool within_limit = true;
};
PieceCount count_pieces(const SamplePath& path, Index left, Index right, double eps, int r,
                        Index limit, ApproxWorkspace& workspace);

struct GammaResult {
  double gamma = 0.0;      // feasible upper end of the final bisection bracket
  Index pieces = 0;        // pieces used at eps = gamma
  double tolerance = 0.0;  // half-width of the final bracket
  bool degenerate = false; // budget at least the number of grid points
};

inline constexpr double kDefaultGammaRelTol = 1e-3;

/// Pathwise minimal error with at most k pieces: bisection over eps in [0, E0],
/// where E0 is the one-piece minimax error of the interval.
GammaResult gamma_k(const SamplePath& path, Index left, Index right, Index k, int r,
                    double rel_tol = kDefaultGammaRelTol);

/// Piecewise polynomial with breakpoints t_0 < ... < t_kappa; piece j lives on
/// ]t_{j-1}, t_j]. At t_0 the spline takes initial_value when set and the
/// first piece's value otherwise.
struct FreeKnotSpline {
  std::vector<double> breakpoints;
  std::vector<PolynomialPiece> pieces;
  int degree_bound = 0;
  std::optional<double> initial_value;

  Index piece_count() const noexcept { return static_cast<Index>(pieces.size()); }
};

struct OptimalSpline {
  FreeKnotSpline spline;
  GammaResult gamma;
};

/// Optimal free-knot spline of the whole path with at most k pieces.
OptimalSpline optimal_spline(const SamplePath& path, Index k, int r,
                             double rel_tol = kDefaultGammaRelTol);

/// Spline value at t in [t_0, t_kappa]; throws ArgumentError outside.
double eval_spline(const FreeKnotSpline& spline, double t);

/// Spline values at the grid indices pieces.front().left .. pieces.back().right,
/// evaluating each grid point with the piece whose index range owns it.
Eigen::VectorXd sample_spline(const FreeKnotSpline& spline, const FineGrid& grid);

/// max_i |path_i - spline(t_i)| over the grid.
double grid_sup_distance(const FreeKnotSpline& spline, const SamplePath& path);

/// Grid for first-exit samples: `steps` cells per eps^2 * initial_horizon, grown
/// lazily up to cap_factor times that horizon.
struct XiGrid {
  Index steps = Index{1} << 18;
  double initial_horizon = 8.0;
  double cap_factor = 64.0;
};

struct XiSamples {
  double epsilon = 0.0;
  std::vector<double> values;          // tau_{1,eps} in time units
  std::vector<std::uint8_t> censored;  // 1 when no exit happened before the cap

  double censoring_rate() const;
};

/// First stopping time tau_{1,eps} of a fresh Brownian path from one seed stream.
double first_stopping_time(int r, double eps, const XiGrid& grid, SeedSpec seed, bool* censored);

/// tau_{1,eps} for streams stream_base .. stream_base + n - 1.
XiSamples xi_samples(int r, double eps, Index n, const XiGrid& grid, std::uint64_t master_seed,
                     std::uint64_t stream_base, unsigned threads = 1);

}  // namespace fks
