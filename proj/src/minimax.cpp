#include "fks/minimax.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fks/errors.hpp"

namespace fks {

namespace {

constexpr int kMaxExchangeIterations = 500;

// Chebyshev series sum_j c_j T_j(z).
double chebyshev_sum(const Eigen::VectorXd& c, double z) {
  double t_prev = 1.0;
  double acc = c[0];
  if (c.size() == 1) return acc;
  double t_cur = z;
  acc += c[1] * z;
  for (Index j = 2; j < c.size(); ++j) {
    const double t_next = 2.0 * z * t_cur - t_prev;
    acc += c[j] * t_next;
    t_prev = t_cur;
    t_cur = t_next;
  }
  return acc;
}

void chebyshev_row(double z, Index degree, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  row[0] = 1.0;
  if (degree >= 1) row[1] = z;
  for (Index j = 2; j <= degree; ++j) row[j] = 2.0 * z * row[j - 1] - row[j - 2];
}

// Converts sum_j c_j T_j(alpha * x - 1) into monomial coefficients in x.
Eigen::VectorXd chebyshev_to_shifted_monomial(const Eigen::VectorXd& cheb, double alpha) {
  const Index n = cheb.size();
  // Power-basis coefficients (in z) of T_0..T_{n-1}.
  Eigen::MatrixXd t_power = Eigen::MatrixXd::Zero(n, n);
  t_power(0, 0) = 1.0;
  if (n > 1) t_power(1, 1) = 1.0;
  for (Index j = 2; j < n; ++j) {
    for (Index m = 0; m < n; ++m) {
      double v = -t_power(j - 2, m);
      if (m > 0) v += 2.0 * t_power(j - 1, m - 1);
      t_power(j, m) = v;
    }
  }
  Eigen::VectorXd in_z = t_power.transpose() * cheb;

  // z^j = (alpha x - 1)^j = sum_m C(j, m) alpha^m x^m (-1)^(j-m)
  Eigen::VectorXd in_x = Eigen::VectorXd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    double binom = 1.0;
    for (Index m = 0; m <= j; ++m) {
      const double sign = ((j - m) % 2 == 0) ? 1.0 : -1.0;
      in_x[m] += in_z[j] * binom * std::pow(alpha, static_cast<double>(m)) * sign;
      binom = binom * static_cast<double>(j - m) / static_cast<double>(m + 1);
    }
  }
  return in_x;
}

double max_residual(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::VectorXd& coeffs) {
  double worst = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(y[i] - horner(coeffs, x[i])));
  }
  return worst;
}

bool valid_reference(const std::vector<Index>& ref, Index n, int r) {
  if (static_cast<Index>(ref.size()) != r + 2) return false;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i] < 0 || ref[i] >= n) return false;
    if (i > 0 && ref[i] <= ref[i - 1]) return false;
  }
  return true;
}

std::vector<Index> initial_reference(Index n, int r) {
  std::vector<Index> ref(static_cast<std::size_t>(r) + 2);
  const double last = static_cast<double>(n - 1);
  for (int i = 0; i < r + 2; ++i) {
    const double u = 0.5 * (1.0 - std::cos(std::numbers::pi * i / (r + 1)));
    ref[static_cast<std::size_t>(i)] = static_cast<Index>(std::lround(u * last));
  }
  // Resolve collisions on short point sets, keeping the ends pinned.
  for (std::size_t i = 1; i < ref.size(); ++i) {
    ref[i] = std::max(ref[i], ref[i - 1] + 1);
  }
  for (std::size_t i = ref.size() - 1; i > 0; --i) {
    ref[i - 1] = std::min(ref[i - 1], ref[i] - 1);
  }
  return ref;
}

PolyFit interpolate(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y, int r) {
  const Index n = x.size();
  PolyFit out;
  out.coefficients = Eigen::VectorXd::Zero(r + 1);
  if (n == 1) {
    out.coefficients[0] = y[0];
    return out;
  }
  const double span = x[n - 1] - x[0];
  const double alpha = 2.0 / span;
  Eigen::MatrixXd a(n, n);
  for (Index i = 0; i < n; ++i) {
    chebyshev_row(alpha * (x[i] - x[0]) - 1.0, n - 1, a.row(i));
  }
  const Eigen::VectorXd cheb = a.fullPivLu().solve(y);
  Eigen::VectorXd mono = chebyshev_to_shifted_monomial(cheb, alpha);
  // Basis is centred at x[0]; callers pass x[0] = 0.
  out.coefficients.head(n) = mono;
  out.sup_error = max_residual(x, y, out.coefficients);
  return out;
}

}  // namespace

double eval_piece(const PolynomialPiece& piece, double t) {
  return horner(piece.coefficients, t - piece.t_left);
}

PolyFit exchange_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y, int r,
                     std::vector<Index>* reference) {
  if (r < 0) throw ArgumentError("polynomial degree must be >= 0");
  const Index n = x.size();
  if (n == 0) throw ArgumentError("minimax fit on an empty point set");
  if (x[0] != 0.0) throw ArgumentError("offsets must start at 0 (shifted basis)");
  if (n <= r + 1) return interpolate(x, y, r);

  const double span = x[n - 1] - x[0];
  const double alpha = 2.0 / span;
  Eigen::VectorXd z(n);
  for (Index i = 0; i < n; ++i) z[i] = alpha * (x[i] - x[0]) - 1.0;
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());

  std::vector<Index> ref;
  if (reference != nullptr && valid_reference(*reference, n, r)) {
    ref = *reference;
  } else {
    ref = initial_reference(n, r);
  }

  const Index m = r + 2;
  Eigen::MatrixXd a(m, m);
  Eigen::VectorXd b(m);
  Eigen::VectorXd cheb(r + 1);
  Eigen::VectorXd residual(n);
  for (int iter = 0; iter < kMaxExchangeIterations; ++iter) {
    for (Index i = 0; i < m; ++i) {
      const Index q = ref[static_cast<std::size_t>(i)];
      chebyshev_row(z[q], r, a.row(i).head(r + 1));
      a(i, r + 1) = (i % 2 == 0) ? 1.0 : -1.0;
      b[i] = y[q];
    }
    const Eigen::VectorXd sol = a.fullPivLu().solve(b);
    cheb = sol.head(r + 1);
    const double level = sol[r + 1];

    Index worst = 0;
    double worst_abs = -1.0;
    for (Index k = 0; k < n; ++k) {
      residual[k] = y[k] - chebyshev_sum(cheb, z[k]);
      const double ak = std::abs(residual[k]);
      if (ak > worst_abs) {
        worst_abs = ak;
        worst = k;
      }
    }
    if (worst_abs <= std::abs(level) * (1.0 + 1e-13) + 1e-15 * scale) break;
    if (std::find(ref.begin(), ref.end(), worst) != ref.end()) break;

    // Sign the reference residuals carry: (-1)^i * sign(level).
    const double level_sign = level >= 0.0 ? 1.0 : -1.0;
    auto ref_sign = [&](std::size_t i) { return (i % 2 == 0 ? 1.0 : -1.0) * level_sign; };
    const double s = residual[worst] >= 0.0 ? 1.0 : -1.0;
    const std::size_t last = ref.size() - 1;
    if (worst < ref.front()) {
      if (s == ref_sign(0)) {
        ref.front() = worst;
      } else {
        ref.pop_back();
        ref.insert(ref.begin(), worst);
      }
    } else if (worst > ref.back()) {
      if (s == ref_sign(last)) {
        ref.back() = worst;
      } else {
        ref.erase(ref.begin());
        ref.push_back(worst);
      }
    } else {
      const auto it = std::upper_bound(ref.begin(), ref.end(), worst);
      const std::size_t hi = static_cast<std::size_t>(it - ref.begin());
      const std::size_t lo = hi - 1;
      if (s == ref_sign(lo)) {
        ref[lo] = worst;
      } else {
        ref[hi] = worst;
      }
    }
  }
  if (reference != nullptr) *reference = ref;

  PolyFit out;
  out.coefficients = chebyshev_to_shifted_monomial(cheb, alpha);
  out.sup_error = max_residual(x, y, out.coefficients);
  return out;
}

PolyFit best_poly_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y, int r,
                      std::vector<Index>* reference) {
  if (r < 0) throw ArgumentError("polynomial degree must be >= 0");
  if (x.size() == 0 || x.size() != y.size()) {
    throw ArgumentError("minimax fit needs a non-empty point set with matching sizes");
  }
  if (r >= 2) return exchange_fit(x, y, r, reference);
  ApproxWorkspace ws(r);
  for (Index i = 0; i < x.size(); ++i) ws.push(x[i], y[i]);
  return ws.fit();
}

PolynomialPiece best_poly(const SamplePath& path, Index left, Index right, int r) {
  if (left < 0 || right >= path.size() || left > right) {
    throw ArgumentError("best_poly needs a non-empty index interval inside the grid");
  }
  const Index n = right - left + 1;
  const double t0 = path.time(left);
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = path.time(left + i) - t0;
  PolyFit fit = best_poly_fit(x, path.values().segment(left, n), r);

  PolynomialPiece piece;
  piece.left = left;
  piece.right = right;
  piece.t_left = t0;
  piece.t_right = path.time(right);
  piece.degree_bound = r;
  piece.coefficients = Eigen::VectorXd::Zero(r + 1);
  piece.coefficients.head(fit.coefficients.size()) = fit.coefficients;
  piece.sup_error = fit.sup_error;
  return piece;
}

double minimax_error(const SamplePath& path, Index left, Index right, int r) {
  return best_poly(path, left, right, r).sup_error;
}

// ---------------------------------------------------------------------------

ApproxWorkspace::ApproxWorkspace(int r) : degree_(r) {
  if (r < 0) throw ArgumentError("polynomial degree must be >= 0");
}

void ApproxWorkspace::reset() {
  count_ = 0;
  upper_.clear();
  lower_.clear();
  has_witness_ = false;
}

void ApproxWorkspace::push_hull(double x, double y) {
  if (degree_ != 1) throw ArgumentError("incremental push supports r <= 1 only");

  const Vertex p{x, y};
  auto cross = [](const Vertex& o, const Vertex& a, const Vertex& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  while (upper_.size() >= 2 && cross(upper_[upper_.size() - 2], upper_.back(), p) >= 0.0) {
    upper_.pop_back();
  }
  upper_.push_back(p);
  while (lower_.size() >= 2 && cross(lower_[lower_.size() - 2], lower_.back(), p) <= 0.0) {
    lower_.pop_back();
  }
  lower_.push_back(p);
  ++count_;
}

ApproxWorkspace::Line ApproxWorkspace::calipers() const {
  if (count_ == 0) return {0.0, 0.0, 0.0};
  if (count_ == 1) return {upper_.front().y, 0.0, 0.0};

  // U(s) = max(y - s x) is carried by the upper hull, L(s) = min(y - s x) by the
  // lower hull; U - L is convex in s with breakpoints at the hull edge slopes.
  auto slope = [](const Vertex& a, const Vertex& b) { return (b.y - a.y) / (b.x - a.x); };
  std::size_t iu = upper_.size() - 1;
  std::size_t jl = 0;
  const std::size_t jl_end = lower_.size() - 1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  double best = inf;
  double best_slope = 0.0;
  double best_mid = 0.0;
  while (iu > 0 || jl < jl_end) {
    const double su = iu > 0 ? slope(upper_[iu - 1], upper_[iu]) : inf;
    const double sl = jl < jl_end ? slope(lower_[jl], lower_[jl + 1]) : inf;
    const double s = std::min(su, sl);
    const double u = upper_[iu].y - s * upper_[iu].x;
    const double l = lower_[jl].y - s * lower_[jl].x;
    const double width = u - l;
    if (width <= best) {
      best = width;
      best_slope = s;
      best_mid = 0.5 * (u + l);
    } else {
      break;
    }
    if (su <= sl) {
      --iu;
    } else {
      ++jl;
    }
  }

  Line line{best_mid, best_slope, 0.0};
  // Same arithmetic as horner() on (intercept, slope), so the value matches a recomputation.
  auto residual = [&](const Vertex& v) { return std::abs(v.y - (line.slope * v.x + line.intercept)); };
  for (const Vertex& v : upper_) line.error = std::max(line.error, residual(v));
  for (const Vertex& v : lower_) line.error = std::max(line.error, residual(v));
  return line;
}

double ApproxWorkspace::error() const {
  if (degree_ == 0) return midrange_error();
  if (degree_ == 1) return calipers().error;
  throw ArgumentError("incremental error supports r <= 1 only");
}

bool ApproxWorkspace::exceeds_hull(double eps) {
  if (degree_ != 1) return error() > eps;
  if (has_witness_ && witness_eps_ == eps && count_ == witness_count_ + 1) {
    const Vertex& last = upper_.back();  // the newest point is always a hull vertex
    const double fitted = witness_slope_ * last.x + witness_intercept_;
    if (std::abs(last.y - fitted) <= eps) {
      witness_count_ = count_;
      return false;
    }
  }
  const Line line = calipers();
  if (line.error > eps) {
    has_witness_ = false;
    return true;
  }
  has_witness_ = true;
  witness_eps_ = eps;
  witness_intercept_ = line.intercept;
  witness_slope_ = line.slope;
  witness_count_ = count_;
  return false;
}

PolyFit ApproxWorkspace::fit() const {
  PolyFit out;
  if (degree_ == 0) {
    out.coefficients = Eigen::VectorXd::Constant(1, count_ == 0 ? 0.0 : 0.5 * (max_ + min_));
    out.sup_error = error();
    return out;
  }
  if (degree_ != 1) throw ArgumentError("incremental fit supports r <= 1 only");
  const Line line = calipers();
  out.coefficients.resize(2);
  out.coefficients << line.intercept, line.slope;
  out.sup_error = line.error;
  return out;
}

// ---------------------------------------------------------------------------

std::optional<Index> minimax_error_prefix_scan(const SamplePath& path, Index start, int r,
                                               double eps) {
  ApproxWorkspace ws(r);
  return minimax_error_prefix_scan(path, start, path.size() - 1, r, eps, ws);
}

std::optional<Index> minimax_error_prefix_scan(const SamplePath& path, Index start, Index last,
                                               int r, double eps, ApproxWorkspace& ws) {
  if (start < 0 || start >= path.size() - 1 || last >= path.size() || last < start) {
    throw ArgumentError("prefix scan needs 0 <= start < M and start <= last <= M");
  }
  if (!(eps > 0.0)) throw ArgumentError("prefix scan threshold must be positive");
  if (ws.degree() != r) throw ArgumentError("workspace degree does not match r");

  const double t0 = path.time(start);
  if (r <= 1) {
    ws.reset();
    for (Index e = start; e <= last; ++e) {
      ws.push(path.time(e) - t0, path[e]);
      if (ws.exceeds(eps)) return e;
    }
    return std::nullopt;
  }

  // Geometric probing, then bisection; relies on the error being nondecreasing
  // in the right endpoint.
  auto& ref = ws.reference();
  auto error_to = [&](Index e) {
    const Index n = e - start + 1;
    Eigen::VectorXd x(n);
    for (Index i = 0; i < n; ++i) x[i] = path.time(start + i) - t0;
    return best_poly_fit(x, path.values().segment(start, n), r, &ref).sup_error;
  };
  Index good = std::min(last, start + r);  // r+1 points are interpolated exactly
  Index bad = -1;
  Index step = r + 1;
  while (true) {
    const Index probe = std::min(last, start + step);
    if (probe <= good) break;
    if (error_to(probe) > eps) {
      bad = probe;
      break;
    }
    good = probe;
    if (probe == last) break;
    step *= 2;
  }
  if (bad < 0) return std::nullopt;
  while (bad - good > 1) {
    const Index mid = good + (bad - good) / 2;
    if (error_to(mid) > eps) {
      bad = mid;
    } else {
      good = mid;
    }
  }
  return bad;
}

}  // namespace fks
