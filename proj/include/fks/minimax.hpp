#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "fks/paths.hpp"

namespace fks {

/// One polynomial of degree <= degree_bound on the closed grid interval [left, right].
///
/// Coefficients are in the shifted monomial basis (t - t_left)^j. sup_error is the
/// best-approximation error of the samples the piece was fitted to.
struct PolynomialPiece {
  Index left = 0;
  Index right = 0;
  double t_left = 0.0;
  double t_right = 0.0;
  int degree_bound = 0;
  Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(1);
  double sup_error = 0.0;
};

/// Horner evaluation at time t.
double eval_piece(const PolynomialPiece& piece, double t);

/// Evaluates a shifted-basis polynomial at offset x = t - t_left.
inline double horner(const Eigen::VectorXd& coefficients, double x) {
  double acc = 0.0;
  for (Index j = coefficients.size() - 1; j >= 0; --j) {
    acc = acc * x + coefficients[j];
  }
  return acc;
}

/// Best uniform polynomial fit on a discrete point set.
struct PolyFit {
  Eigen::VectorXd coefficients;  // powers of the offset x
  double sup_error = 0.0;
};

/// Discrete minimax fit of degree <= r to (offsets, values). Offsets must be
/// strictly increasing; they are usually t_i - t_left.
///
/// r = 0 uses the midrange, r = 1 the convex-hull calipers and r >= 2 a
/// single-point exchange (Remez) iteration. `reference` optionally warm-starts
/// the exchange with r+2 point indices and receives the final reference set.
PolyFit best_poly_fit(const Eigen::Ref<const Eigen::VectorXd>& offsets,
                      const Eigen::Ref<const Eigen::VectorXd>& values, int r,
                      std::vector<Index>* reference = nullptr);

/// Exchange iteration for any r, including r <= 1. Exposed for cross-checks.
PolyFit exchange_fit(const Eigen::Ref<const Eigen::VectorXd>& offsets,
                     const Eigen::Ref<const Eigen::VectorXd>& values, int r,
                     std::vector<Index>* reference = nullptr);

/// Best degree-<= r approximation to path samples on grid indices [left, right].
PolynomialPiece best_poly(const SamplePath& path, Index left, Index right, int r);

/// Minimax error of the samples on [left, right]; same value as best_poly(...).sup_error.
double minimax_error(const SamplePath& path, Index left, Index right, int r);

/// Running state for appending points in increasing time order.
///
/// r = 0 keeps the running min/max, r = 1 the upper and lower convex hulls
/// together with a witness line that certifies "error <= eps" without a
/// full calipers pass. For r >= 2 only the last exchange reference is kept;
/// scans then probe with full solves.
class ApproxWorkspace {
 public:
  explicit ApproxWorkspace(int r);

  int degree() const noexcept { return degree_; }
  Index count() const noexcept { return count_; }

  void reset();

  /// Appends (x, y). Requires r <= 1 and x larger than every previous offset.
  void push(double x, double y) {
    if (degree_ == 0) {
      if (count_ == 0) {
        min_ = max_ = y;
      } else {
        min_ = y < min_ ? y : min_;
        max_ = y > max_ ? y : max_;
      }
      ++count_;
      return;
    }
    push_hull(x, y);
  }

  /// Exact minimax error of the points pushed so far (r <= 1).
  double error() const;

  /// error() > eps, with the witness shortcut for r = 1.
  bool exceeds(double eps) {
    if (degree_ == 0) return midrange_error() > eps;
    return exceeds_hull(eps);
  }

  /// Minimax polynomial of the pushed points (r <= 1).
  PolyFit fit() const;

  std::vector<Index>& reference() noexcept { return reference_; }

 private:
  struct Vertex {
    double x;
    double y;
  };
  struct Line {
    double intercept;
    double slope;
    double error;
  };

  Line calipers() const;
  void push_hull(double x, double y);
  bool exceeds_hull(double eps);
  double midrange_error() const noexcept {
    if (count_ == 0) return 0.0;
    const double c = 0.5 * (max_ + min_);
    return max_ - c > c - min_ ? max_ - c : c - min_;
  }

  int degree_;
  Index count_ = 0;
  double min_ = 0.0;
  double max_ = 0.0;
  std::vector<Vertex> upper_;
  std::vector<Vertex> lower_;
  bool has_witness_ = false;
  Index witness_count_ = 0;
  double witness_eps_ = 0.0;
  double witness_intercept_ = 0.0;
  double witness_slope_ = 0.0;
  std::vector<Index> reference_;
};

/// Smallest index e > start with minimax error on [start, e] strictly above eps,
/// or nullopt when the error stays <= eps up to the last grid index.
std::optional<Index> minimax_error_prefix_scan(const SamplePath& path, Index start, int r,
                                               double eps);

/// Same as above but stops looking after index `last`.
std::optional<Index> minimax_error_prefix_scan(const SamplePath& path, Index start, Index last,
                                               int r, double eps, ApproxWorkspace& workspace);

}  // namespace fks
