#include "fks/minimax_lp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "fks/errors.hpp"

namespace fks {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr int kMaxPivots = 20000;

struct Tableau {
  Eigen::MatrixXd t;          // rows: constraints, last column: rhs
  std::vector<Index> basis;   // basic column per row
};

void pivot(Tableau& tab, Index row, Index col) {
  tab.t.row(row) /= tab.t(row, col);
  for (Index i = 0; i < tab.t.rows(); ++i) {
    if (i != row && tab.t(i, col) != 0.0) {
      tab.t.row(i) -= tab.t(i, col) * tab.t.row(row);
    }
  }
  tab.basis[static_cast<std::size_t>(row)] = col;
}

// Maximizes obj . z from a canonical tableau with Bland's rule.
void run_simplex(Tableau& tab, const Eigen::VectorXd& obj, const std::vector<bool>& may_enter) {
  const Index m = tab.t.rows();
  const Index ncols = tab.t.cols() - 1;
  for (int it = 0; it < kMaxPivots; ++it) {
    Eigen::VectorXd cb(m);
    for (Index i = 0; i < m; ++i) cb[i] = obj[tab.basis[static_cast<std::size_t>(i)]];
    Index enter = -1;
    for (Index j = 0; j < ncols; ++j) {
      if (!may_enter[static_cast<std::size_t>(j)]) continue;
      const double reduced = obj[j] - cb.dot(tab.t.col(j));
      if (reduced > kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return;

    Index leave = -1;
    double best_ratio = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double a = tab.t(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = tab.t(i, ncols) / a;
      if (leave < 0 || ratio < best_ratio - 1e-14 ||
          (std::abs(ratio - best_ratio) <= 1e-14 &&
           tab.basis[static_cast<std::size_t>(i)] < tab.basis[static_cast<std::size_t>(leave)])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) throw OracleError("LP oracle: unbounded direction in the minimax dual");
    pivot(tab, leave, enter);
  }
  throw OracleError("LP oracle: pivot limit reached");
}

PolyFit interpolate_qr(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y, int r) {
  const Index n = x.size();
  PolyFit out;
  out.coefficients = Eigen::VectorXd::Zero(r + 1);
  Eigen::MatrixXd v(n, n);
  for (Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (Index j = 0; j < n; ++j) {
      v(i, j) = p;
      p *= x[i] - x[0];
    }
  }
  out.coefficients.head(n) = v.colPivHouseholderQr().solve(y);
  for (Index i = 0; i < n; ++i) {
    out.sup_error = std::max(out.sup_error, std::abs(y[i] - horner(out.coefficients, x[i] - x[0])));
  }
  return out;
}

}  // namespace

PolyFit lp_oracle_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y, int r) {
  if (r < 0) throw ArgumentError("polynomial degree must be >= 0");
  const Index n = x.size();
  if (n == 0 || y.size() != n) throw ArgumentError("LP oracle needs a non-empty point set");
  if (n <= r + 1) return interpolate_qr(x, y, r);

  // Scaled monomials (x / span)^j keep the constraint matrix entries in [0, 1].
  const double span = x[n - 1] - x[0];
  const Index m = r + 2;
  const Index real_cols = 2 * n;
  const Index ncols = real_cols + m;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, ncols);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(ncols);
  for (Index i = 0; i < n; ++i) {
    const double u = (x[i] - x[0]) / span;
    double p = 1.0;
    for (Index j = 0; j <= r; ++j) {
      a(j, 2 * i) = p;
      a(j, 2 * i + 1) = -p;
      p *= u;
    }
    a(r + 1, 2 * i) = 1.0;
    a(r + 1, 2 * i + 1) = 1.0;
    c[2 * i] = y[i];
    c[2 * i + 1] = -y[i];
  }
  for (Index k = 0; k < m; ++k) a(k, real_cols + k) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b[r + 1] = 1.0;

  Tableau tab;
  tab.t.resize(m, ncols + 1);
  tab.t.leftCols(ncols) = a;
  tab.t.col(ncols) = b;
  tab.basis.resize(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) tab.basis[static_cast<std::size_t>(k)] = real_cols + k;

  // Phase 1: drive the artificial variables to zero.
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ncols);
  phase1.tail(m).setConstant(-1.0);
  std::vector<bool> all(static_cast<std::size_t>(ncols), true);
  run_simplex(tab, phase1, all);
  double infeasibility = 0.0;
  for (Index k = 0; k < m; ++k) {
    if (tab.basis[static_cast<std::size_t>(k)] >= real_cols) infeasibility += tab.t(k, ncols);
  }
  if (infeasibility > 1e-9) throw OracleError("LP oracle: dual problem reported infeasible");
  for (Index k = 0; k < m; ++k) {
    if (tab.basis[static_cast<std::size_t>(k)] < real_cols) continue;
    for (Index j = 0; j < real_cols; ++j) {
      if (std::abs(tab.t(k, j)) > 1e-9) {
        pivot(tab, k, j);
        break;
      }
    }
  }

  // Phase 2 on the real columns only.
  std::vector<bool> real(static_cast<std::size_t>(ncols), false);
  for (Index j = 0; j < real_cols; ++j) real[static_cast<std::size_t>(j)] = true;
  run_simplex(tab, c, real);

  // Simplex multipliers y solve B^T y = c_B; y_0..y_r are the polynomial, y_{r+1} the level.
  Eigen::MatrixXd basis_matrix(m, m);
  Eigen::VectorXd cb(m);
  for (Index k = 0; k < m; ++k) {
    const Index col = tab.basis[static_cast<std::size_t>(k)];
    basis_matrix.col(k) = a.col(col);
    cb[k] = c[col];
  }
  const Eigen::VectorXd multipliers = basis_matrix.transpose().fullPivLu().solve(cb);
  if (!multipliers.allFinite()) throw OracleError("LP oracle: singular optimal basis");

  PolyFit out;
  out.coefficients.resize(r + 1);
  double scale = 1.0;
  for (Index j = 0; j <= r; ++j) {
    out.coefficients[j] = multipliers[j] / scale;
    scale *= span;
  }
  for (Index i = 0; i < n; ++i) {
    out.sup_error = std::max(out.sup_error, std::abs(y[i] - horner(out.coefficients, x[i] - x[0])));
  }
  return out;
}

PolynomialPiece lp_oracle_best_poly(const SamplePath& path, Index left, Index right, int r) {
  if (left < 0 || right >= path.size() || left > right) {
    throw ArgumentError("LP oracle needs a non-empty index interval inside the grid");
  }
  const Index n = right - left + 1;
  const double t0 = path.time(left);
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) x[i] = path.time(left + i) - t0;
  const PolyFit fit = lp_oracle_fit(x, path.values().segment(left, n), r);

  PolynomialPiece piece;
  piece.left = left;
  piece.right = right;
  piece.t_left = t0;
  piece.t_right = path.time(right);
  piece.degree_bound = r;
  piece.coefficients = fit.coefficients;
  piece.sup_error = fit.sup_error;
  return piece;
}

}  // namespace fks
