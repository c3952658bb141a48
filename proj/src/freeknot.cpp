#include "fks/freeknot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "fks/errors.hpp"
#include "fks/parallel.hpp"

namespace fks {

namespace {

void check_interval(const SamplePath& path, Index left, Index right) {
  if (left < 0 || right >= path.size() || left >= right) {
    throw ArgumentError("interval must satisfy 0 <= left < right <= M");
  }
}

}  // namespace

PieceCount count_pieces(const SamplePath& path, Index left, Index right, double eps, int r,
                        Index limit, ApproxWorkspace& ws) {
  PieceCount out;
  Index start = left;
  while (true) {
    const auto exceed = minimax_error_prefix_scan(path, start, right, r, eps, ws);
    ++out.pieces;
    if (!exceed) break;
    Index tau = *exceed - 1;
    if (tau == start) {
      tau = start + 1;
      out.floored = true;
    }
    if (tau >= right) break;
    start = tau;
    if (out.pieces >= limit) {
      out.within_limit = false;
      return out;
    }
  }
  out.within_limit = out.pieces <= limit;
  return out;
}

StoppingSequence stopping_times(const SamplePath& path, Index left, Index right, double eps,
                                int r) {
  check_interval(path, left, right);
  if (!(eps > 0.0)) throw ArgumentError("stopping level must be positive");
  ApproxWorkspace ws(r);
  StoppingSequence seq;
  seq.epsilon = eps;
  seq.taus.push_back(left);
  Index start = left;
  while (true) {
    const auto exceed = minimax_error_prefix_scan(path, start, right, r, eps, ws);
    if (!exceed) {
      seq.taus.push_back(right);
      seq.exhausted = true;
      break;
    }
    Index tau = *exceed - 1;
    if (tau == start) {
      tau = start + 1;
      ++seq.floored;
    }
    seq.taus.push_back(tau);
    if (tau >= right) break;
    start = tau;
  }
  return seq;
}

GammaResult gamma_k(const SamplePath& path, Index left, Index right, Index k, int r,
                    double rel_tol) {
  check_interval(path, left, right);
  if (k < 1) throw ArgumentError("piece budget k must be >= 1");
  if (!(rel_tol > 0.0) || rel_tol >= 1.0) throw ArgumentError("rel_tol must lie in (0, 1)");

  GammaResult out;
  const Index points = right - left + 1;
  if (k >= points) {
    out.degenerate = true;
    out.pieces = points;
    return out;
  }
  double e0 = minimax_error(path, left, right, r);
  // An exactly polynomial segment only fits up to rounding; call that zero.
  const double scale = path.values().segment(left, points).cwiseAbs().maxCoeff();
  if (e0 <= 64.0 * std::numeric_limits<double>::epsilon() * scale) e0 = 0.0;
  out.gamma = e0;
  out.pieces = 1;
  if (k == 1 || e0 == 0.0) return out;

  ApproxWorkspace ws(r);
  auto fits = [&](double eps) {
    const PieceCount c = count_pieces(path, left, right, eps, r, k, ws);
    return c.within_limit && !c.floored;
  };
  double lo = 0.0;
  double hi = e0;
  const double width = rel_tol * e0;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (fits(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.gamma = hi;
  out.tolerance = 0.5 * (hi - lo);
  out.pieces = count_pieces(path, left, right, hi, r, k, ws).pieces;
  return out;
}

OptimalSpline optimal_spline(const SamplePath& path, Index k, int r, double rel_tol) {
  const Index right = path.size() - 1;
  OptimalSpline out;
  out.gamma = gamma_k(path, 0, right, k, r, rel_tol);

  std::vector<Index> taus;
  if (out.gamma.degenerate) {
    // One constant per grid step, matching the sample at the right end of its cell.
    FreeKnotSpline& s = out.spline;
    s.degree_bound = r;
    s.initial_value = path[0];
    for (Index i = 0; i <= right; ++i) s.breakpoints.push_back(path.time(i));
    for (Index i = 1; i <= right; ++i) {
      PolynomialPiece p;
      p.left = i - 1;
      p.right = i;
      p.t_left = path.time(i - 1);
      p.t_right = path.time(i);
      p.degree_bound = r;
      p.coefficients[0] = path[i];
      s.pieces.push_back(std::move(p));
    }
    return out;
  } else if (out.gamma.gamma == 0.0) {
    taus = {0, right};
  } else {
    taus = stopping_times(path, 0, right, out.gamma.gamma, r).taus;
  }

  FreeKnotSpline& s = out.spline;
  s.degree_bound = r;
  s.breakpoints.reserve(taus.size());
  for (Index tau : taus) s.breakpoints.push_back(path.time(tau));
  s.pieces.reserve(taus.size() - 1);
  for (std::size_t j = 1; j < taus.size(); ++j) {
    s.pieces.push_back(best_poly(path, taus[j - 1], taus[j], r));
  }
  return out;
}

double eval_spline(const FreeKnotSpline& spline, double t) {
  if (spline.pieces.empty()) throw ArgumentError("empty spline");
  const double t0 = spline.breakpoints.front();
  const double t1 = spline.breakpoints.back();
  if (!(t >= t0 && t <= t1)) throw ArgumentError("spline evaluated outside [t_0, t_kappa]");
  if (t == t0 && spline.initial_value) return *spline.initial_value;
  // First breakpoint >= t among t_1..t_kappa selects the piece on ]t_{j-1}, t_j].
  const auto it = std::lower_bound(spline.breakpoints.begin() + 1, spline.breakpoints.end(), t);
  const auto j = static_cast<std::size_t>(it - (spline.breakpoints.begin() + 1));
  return eval_piece(spline.pieces[j], t);
}

Eigen::VectorXd sample_spline(const FreeKnotSpline& spline, const FineGrid& grid) {
  if (spline.pieces.empty()) throw ArgumentError("empty spline");
  const Index first = spline.pieces.front().left;
  const Index last = spline.pieces.back().right;
  Eigen::VectorXd out(last - first + 1);
  out[0] = spline.initial_value ? *spline.initial_value
                                : eval_piece(spline.pieces.front(), grid.time(first));
  for (const PolynomialPiece& p : spline.pieces) {
    for (Index i = p.left + 1; i <= p.right; ++i) {
      out[i - first] = eval_piece(p, grid.time(i));
    }
  }
  return out;
}

double grid_sup_distance(const FreeKnotSpline& spline, const SamplePath& path) {
  const Eigen::VectorXd fitted = sample_spline(spline, path.grid());
  const Index first = spline.pieces.front().left;
  return (path.values().segment(first, fitted.size()) - fitted).cwiseAbs().maxCoeff();
}

double XiSamples::censoring_rate() const {
  if (censored.empty()) return 0.0;
  Index count = 0;
  for (auto c : censored) count += c;
  return static_cast<double>(count) / static_cast<double>(censored.size());
}

double first_stopping_time(int r, double eps, const XiGrid& grid, SeedSpec seed, bool* censored) {
  if (!(eps > 0.0)) throw ArgumentError("stopping level must be positive");
  if (grid.steps < 2) throw ConfigError("first-exit grid needs at least two steps");
  const double step = eps * eps * grid.initial_horizon / static_cast<double>(grid.steps);
  const auto cap = static_cast<Index>(std::llround(grid.cap_factor * static_cast<double>(grid.steps)));
  WienerStream stream(seed, step);

  if (r <= 1) {
    ApproxWorkspace ws(r);
    ws.push(0.0, 0.0);
    double w = 0.0;
    for (Index i = 1; i <= cap; ++i) {
      w += stream.next_increment();
      ws.push(static_cast<double>(i) * step, w);
      if (ws.exceeds(eps)) {
        if (censored != nullptr) *censored = false;
        return static_cast<double>(i - 1) * step;
      }
    }
    if (censored != nullptr) *censored = true;
    return static_cast<double>(cap) * step;
  }

  // General degree: grow the path by doubling and rescan.
  Eigen::VectorXd values;
  Index length = grid.steps;
  stream.extend(values, length + 1);
  while (true) {
    const SamplePath path(FineGrid::with_step(length, step), values);
    if (const auto e = minimax_error_prefix_scan(path, 0, r, eps)) {
      if (censored != nullptr) *censored = false;
      return static_cast<double>(*e - 1) * step;
    }
    if (length >= cap) break;
    const Index grow = std::min(length, cap - length);
    stream.extend(values, grow);
    length += grow;
  }
  if (censored != nullptr) *censored = true;
  return static_cast<double>(length) * step;
}

XiSamples xi_samples(int r, double eps, Index n, const XiGrid& grid, std::uint64_t master_seed,
                     std::uint64_t stream_base, unsigned threads) {
  if (n < 1) throw ArgumentError("need at least one sample");
  XiSamples out;
  out.epsilon = eps;
  out.values.resize(static_cast<std::size_t>(n));
  out.censored.resize(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](Index i) {
    bool cens = false;
    const SeedSpec seed{master_seed, stream_base + static_cast<std::uint64_t>(i)};
    out.values[static_cast<std::size_t>(i)] = first_stopping_time(r, eps, grid, seed, &cens);
    out.censored[static_cast<std::size_t>(i)] = cens ? 1 : 0;
  });
  return out;
}

}  // namespace fks
