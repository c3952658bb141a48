#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <boost/random/normal_distribution.hpp>

#include "fks/random.hpp"

namespace fks {

using Index = Eigen::Index;

/// Equispaced times t_i = origin + i * step, i = 0..steps.
///
/// The step is stored rather than recomputed so that sub-grids cut out of a
/// parent grid reproduce the parent's times bit-for-bit.
class FineGrid {
 public:
  /// Grid over [0, horizon] with `steps` cells. Throws ConfigError for steps < 1
  /// or a non-positive horizon.
  explicit FineGrid(Index steps, double horizon = 1.0);

  static FineGrid with_step(Index steps, double step, double origin = 0.0);

  Index steps() const noexcept { return steps_; }
  Index size() const noexcept { return steps_ + 1; }
  double step() const noexcept { return step_; }
  double origin() const noexcept { return origin_; }
  double horizon() const noexcept { return static_cast<double>(steps_) * step_; }
  double time(Index i) const noexcept { return origin_ + static_cast<double>(i) * step_; }

  /// Grid covering indices [from, to] of this grid.
  FineGrid subgrid(Index from, Index to) const;

 private:
  FineGrid(Index steps, double step, double origin, int);

  Index steps_;
  double step_;
  double origin_;
};

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

/// Scalar path sampled on a FineGrid.
class SamplePath {
 public:
  SamplePath(FineGrid grid, Eigen::VectorXd values);

  const FineGrid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index i) const { return values_[i]; }
  double time(Index i) const noexcept { return grid_.time(i); }

 private:
  FineGrid grid_;
  Eigen::VectorXd values_;
};

/// Sequential generator of Brownian increments for one seed stream.
///
/// sample_wiener() is a thin wrapper around this class, so a path grown
/// lazily chunk by chunk is identical to one generated in a single call.
class WienerStream {
 public:
  WienerStream(SeedSpec seed, double step);

  double next_increment() { return sqrt_step_ * normal_(engine_); }

  /// Appends `count` further path values to `out`, continuing from its last value
  /// (or from 0 when `out` is empty).
  void extend(Eigen::VectorXd& out, Index count);

 private:
  Philox4x32 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};  // ziggurat
  double sqrt_step_;
};

/// Brownian path W on `grid` with W(t_0) = 0. Requires at least two grid steps.
SamplePath sample_wiener(const FineGrid& grid, SeedSpec seed);

/// W^from(t) = W(t) - W(t_from) restricted to indices [from, to]; keeps absolute times.
SamplePath shifted_subpath(const SamplePath& path, Index from_index, Index to_index);

}  // namespace fks
