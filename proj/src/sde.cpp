#include "fks/sde.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "fks/errors.hpp"
#include "fks/random.hpp"

namespace fks {

namespace {

constexpr Index kSigmaCheckPoints = 1 << 16;

double zero_initial_value(SeedSpec) { return 0.0; }

double standard_normal_initial_value(SeedSpec seed) {
  Philox4x32 engine(seed.master_seed,
                    stream_domain::stream(stream_domain::kInitialValue, seed.stream_index));
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  return normal(engine);
}

}  // namespace

AdditiveNoiseSde make_sde(std::string name, std::function<double(double, double)> drift,
                          std::function<double(double)> diffusion,
                          std::function<double(SeedSpec)> initial_value,
                          std::string lipschitz_note) {
  if (!drift || !diffusion || !initial_value) {
    throw ConfigError("SDE '" + name + "' is missing a coefficient function");
  }
  for (Index i = 0; i <= kSigmaCheckPoints; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(kSigmaCheckPoints);
    const double s = diffusion(t);
    if (!(std::abs(s) > 0.0) || !std::isfinite(s)) {
      throw ConfigError("SDE '" + name + "': sigma must be nonzero on [0, 1] (fails at t = " +
                        std::to_string(t) + ")");
    }
  }
  return AdditiveNoiseSde{std::move(name), std::move(drift), std::move(diffusion),
                          std::move(initial_value), std::move(lipschitz_note)};
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"bm", "ou", "ramp-sigma", "time-drift"};
  return names;
}

AdditiveNoiseSde sde_preset(std::string_view name) {
  if (name == "bm") {
    return make_sde(
        "bm", [](double, double) { return 0.0; }, [](double) { return 1.0; }, zero_initial_value,
        "a = 0, sigma = 1: every Lipschitz constant is 0");
  }
  if (name == "ou") {
    return make_sde(
        "ou", [](double, double x) { return -x; }, [](double) { return 1.0; }, zero_initial_value,
        "a = -x: K = 1; sigma constant");
  }
  if (name == "ramp-sigma") {
    return make_sde(
        "ramp-sigma", [](double, double x) { return -x; }, [](double t) { return 1.0 + 2.0 * t; },
        zero_initial_value, "a = -x: K = 1; sigma = 1 + 2t is 2-Lipschitz with |sigma| >= 1");
  }
  if (name == "time-drift") {
    return make_sde(
        "time-drift",
        [](double t, double x) { return std::sin(2.0 * std::numbers::pi * t) - x; },
        [](double) { return 1.0; }, standard_normal_initial_value,
        "a = sin(2 pi t) - x: K = 2 pi; X(0) ~ N(0, 1) independent of W");
  }
  throw ConfigError("unknown SDE preset '" + std::string(name) + "'");
}

double sigma_l2_norm(const AdditiveNoiseSde& sde) {
  auto sq = [&](double t) {
    const double s = sde.diffusion(t);
    return s * s;
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(sq, 0.0, 1.0, 15, 1e-10);
  return std::sqrt(integral);
}

double sigma_sup_norm(const AdditiveNoiseSde& sde) {
  double best = 0.0;
  for (Index i = 0; i <= kSigmaCheckPoints; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(kSigmaCheckPoints);
    best = std::max(best, std::abs(sde.diffusion(t)));
  }
  return best;
}

SamplePath reference_solution(const AdditiveNoiseSde& sde, const SamplePath& w, double x0) {
  const FineGrid& grid = w.grid();
  const double h = grid.step();
  Eigen::VectorXd x(w.size());
  x[0] = x0;
  for (Index i = 0; i + 1 < w.size(); ++i) {
    const double t = grid.time(i);
    x[i + 1] = x[i] + sde.drift(t, x[i]) * h + sde.diffusion(t) * (w[i + 1] - w[i]);
  }
  return SamplePath(grid, std::move(x));
}

Index coarse_steps(Index k, double delta) {
  if (!(delta > 0.5 && delta < 1.0)) {
    throw ConfigError("delta must lie in (1/2, 1), got " + std::to_string(delta));
  }
  if (k < 1) throw ConfigError("knot budget k must be >= 1");
  const double raw = std::pow(static_cast<double>(k), delta);
  // Guard against pow() landing just below an exact integer power.
  return static_cast<Index>(std::floor(raw * (1.0 + 1e-12)));
}

Index snap_coarse_index(Index l, Index n, Index fine_steps) {
  return (2 * l * fine_steps + n) / (2 * n);
}

CoarseScheme euler_coarse(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index n) {
  const FineGrid& grid = w.grid();
  if (n < 1) throw ConfigError("coarse grid needs n >= 1");
  if (n > grid.steps()) {
    throw ConfigError("coarse steps n = " + std::to_string(n) + " exceed fine steps M = " +
                      std::to_string(grid.steps()));
  }
  CoarseScheme c;
  c.n = n;
  c.indices.resize(static_cast<std::size_t>(n) + 1);
  c.times.resize(n + 1);
  c.euler_values.resize(n + 1);
  c.sigma_values.resize(n);
  for (Index l = 0; l <= n; ++l) {
    const Index idx = snap_coarse_index(l, n, grid.steps());
    c.indices[static_cast<std::size_t>(l)] = idx;
    c.times[l] = grid.time(idx);
    if (l < n) c.sigma_values[l] = sde.diffusion(c.times[l]);
  }
  c.euler_values[0] = x0;
  for (Index l = 0; l < n; ++l) {
    const Index i0 = c.indices[static_cast<std::size_t>(l)];
    const Index i1 = c.indices[static_cast<std::size_t>(l) + 1];
    const double dt = static_cast<double>(i1 - i0) * grid.step();
    const double a = sde.drift(c.times[l], c.euler_values[l]);
    c.euler_values[l + 1] = c.euler_values[l] + a * dt + c.sigma_values[l] * (w[i1] - w[i0]);
  }
  return c;
}

CoarseScheme euler_coarse(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index k,
                          double delta) {
  return euler_coarse(sde, w, x0, coarse_steps(k, delta));
}

Index KnotBudget::total_knots() const {
  Index total = n + 1;
  for (Index ml : m) total += ml - 1;
  return total;
}

KnotBudget knot_budget_from_squares(const Eigen::VectorXd& sigma_squares, Index k, Index n) {
  if (n < 1 || k <= n) {
    throw ConfigError("knot budget needs k > n >= 1 (k = " + std::to_string(k) +
                      ", n = " + std::to_string(n) + ")");
  }
  if (sigma_squares.size() < n) throw ConfigError("need sigma at every coarse point");
  const Eigen::VectorXd sq = sigma_squares.head(n);
  if ((sq.array() <= 0.0).any()) throw ConfigError("sigma vanishes at a coarse point");
  const double total = sq.sum();
  if (!std::isfinite(total)) throw ConfigError("sigma is not finite on the coarse grid");
  KnotBudget b;
  b.k = k;
  b.n = n;
  b.m.resize(static_cast<std::size_t>(n));
  const auto spare = static_cast<double>(k - n);
  for (Index l = 0; l < n; ++l) {
    b.m[static_cast<std::size_t>(l)] = static_cast<Index>(std::floor(sq[l] * spare / total)) + 1;
  }
  return b;
}

KnotBudget knot_budget(const Eigen::VectorXd& sigma_values, Index k, Index n) {
  if (sigma_values.size() < n) throw ConfigError("need sigma at every coarse point");
  return knot_budget_from_squares(sigma_values.head(std::max<Index>(n, 0)).array().square(), k, n);
}

KnotBudget uniform_budget(Index k, Index n) {
  if (n < 1 || k <= n) {
    throw ConfigError("knot budget needs k > n >= 1 (k = " + std::to_string(k) +
                      ", n = " + std::to_string(n) + ")");
  }
  KnotBudget b;
  b.k = k;
  b.n = n;
  b.m.assign(static_cast<std::size_t>(n), (k - n) / n + 1);
  return b;
}

CompositeApprox build_composite(const AdditiveNoiseSde& sde, const SamplePath& w, double x0,
                                const CoarseScheme& coarse, const KnotBudget& budget, int r,
                                double rel_tol) {
  if (r < 0) throw ConfigError("degree r must be >= 0");
  if (static_cast<Index>(budget.m.size()) != coarse.n) {
    throw ConfigError("knot budget and coarse grid disagree on the number of cells");
  }
  const int degree = std::max(r, 1);
  CompositeApprox out;
  out.coarse = coarse;
  out.budget = budget;
  out.cell_errors.resize(static_cast<std::size_t>(coarse.n));
  out.cell_gammas.resize(static_cast<std::size_t>(coarse.n));
  FreeKnotSpline& s = out.spline;
  s.degree_bound = degree;
  s.initial_value = x0;
  s.breakpoints.push_back(w.time(coarse.indices.front()));

  for (Index l = 0; l < coarse.n; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const Index i0 = coarse.indices[ul];
    const Index i1 = coarse.indices[ul + 1];
    const SamplePath cell = shifted_subpath(w, i0, i1);
    const OptimalSpline fit = optimal_spline(cell, budget.m[ul], r, rel_tol);
    out.cell_gammas[ul] = fit.gamma;

    const Eigen::VectorXd fitted = sample_spline(fit.spline, cell.grid());
    out.cell_errors[ul] = (cell.values().tail(fitted.size() - 1) - fitted.tail(fitted.size() - 1))
                              .cwiseAbs()
                              .maxCoeff();

    const double t_l = coarse.times[l];
    const double x_l = coarse.euler_values[l];
    const double a_l = sde.drift(t_l, x_l);
    const double sigma_l = coarse.sigma_values[l];
    for (const PolynomialPiece& p : fit.spline.pieces) {
      PolynomialPiece q;
      q.left = p.left + i0;
      q.right = p.right + i0;
      q.t_left = p.t_left;
      q.t_right = p.t_right;
      q.degree_bound = degree;
      q.coefficients = Eigen::VectorXd::Zero(degree + 1);
      q.coefficients.head(p.coefficients.size()) = sigma_l * p.coefficients;
      q.coefficients[0] += x_l + a_l * (p.t_left - t_l);
      q.coefficients[1] += a_l;
      q.sup_error = std::abs(sigma_l) * p.sup_error;
      s.breakpoints.push_back(w.time(q.right));
      s.pieces.push_back(std::move(q));
    }
  }
  return out;
}

CompositeApprox build_dagger(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index k,
                             double delta, int r, double rel_tol) {
  const CoarseScheme coarse = euler_coarse(sde, w, x0, k, delta);
  KnotBudget budget = knot_budget(coarse.sigma_values, k, coarse.n);
  budget.delta = delta;
  return build_composite(sde, w, x0, coarse, budget, r, rel_tol);
}

CompositeApprox build_star(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index k,
                           double delta, int r, double rel_tol) {
  const CoarseScheme coarse = euler_coarse(sde, w, x0, k, delta);
  KnotBudget budget = uniform_budget(k, coarse.n);
  budget.delta = delta;
  return build_composite(sde, w, x0, coarse, budget, r, rel_tol);
}

FreeKnotSpline build_euler_interp(const AdditiveNoiseSde& sde, const SamplePath& w, double x0,
                                  Index k) {
  if (k < 1) throw ConfigError("Euler step count k must be >= 1");
  const CoarseScheme c = euler_coarse(sde, w, x0, k);
  FreeKnotSpline s;
  s.degree_bound = 1;
  s.breakpoints.reserve(static_cast<std::size_t>(k) + 1);
  s.breakpoints.push_back(c.times[0]);
  for (Index l = 0; l < k; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    PolynomialPiece p;
    p.left = c.indices[ul];
    p.right = c.indices[ul + 1];
    p.t_left = c.times[l];
    p.t_right = c.times[l + 1];
    p.degree_bound = 1;
    p.coefficients.resize(2);
    p.coefficients << c.euler_values[l],
        (c.euler_values[l + 1] - c.euler_values[l]) / (c.times[l + 1] - c.times[l]);
    s.breakpoints.push_back(c.times[l + 1]);
    s.pieces.push_back(std::move(p));
  }
  return s;
}

SamplePath xbar_process(const AdditiveNoiseSde& sde, const SamplePath& w, double x0, Index n) {
  const CoarseScheme c = euler_coarse(sde, w, x0, n);
  const double h = w.grid().step();
  Eigen::VectorXd x(w.size());
  x[0] = x0;
  double x_l = x0;
  for (Index l = 0; l < n; ++l) {
    const Index i0 = c.indices[static_cast<std::size_t>(l)];
    const Index i1 = c.indices[static_cast<std::size_t>(l) + 1];
    const double a = sde.drift(c.times[l], x_l);
    const double sigma_l = c.sigma_values[l];
    for (Index i = i0 + 1; i <= i1; ++i) {
      const double dt = static_cast<double>(i - i0) * h;
      x[i] = x_l + a * dt + sigma_l * (w[i] - w[i0]);
    }
    x_l = x[i1];
  }
  return SamplePath(w.grid(), std::move(x));
}

}  // namespace fks
