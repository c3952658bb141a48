#include "fks/paths.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fks/errors.hpp"

namespace fks {

FineGrid::FineGrid(Index steps, double horizon)
    : steps_(steps), step_(horizon / static_cast<double>(steps)), origin_(0.0) {
  if (steps < 1) {
    throw ConfigError("fine grid needs at least one step, got " + std::to_string(steps));
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("fine grid horizon must be positive and finite");
  }
}

FineGrid::FineGrid(Index steps, double step, double origin, int)
    : steps_(steps), step_(step), origin_(origin) {}

FineGrid FineGrid::with_step(Index steps, double step, double origin) {
  if (steps < 1 || !(step > 0.0)) {
    throw ConfigError("fine grid needs at least one step of positive length");
  }
  return FineGrid(steps, step, origin, 0);
}

FineGrid FineGrid::subgrid(Index from, Index to) const {
  if (from < 0 || to > steps_ || from >= to) {
    throw ArgumentError("subgrid needs 0 <= from < to <= steps");
  }
  return FineGrid(to - from, step_, time(from), 0);
}

SamplePath::SamplePath(FineGrid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ArgumentError("sample path length " + std::to_string(values_.size()) +
                        " does not match grid size " + std::to_string(grid_.size()));
  }
}

WienerStream::WienerStream(SeedSpec seed, double step)
    : engine_(seed.master_seed, seed.stream_index), sqrt_step_(std::sqrt(step)) {}

void WienerStream::extend(Eigen::VectorXd& out, Index count) {
  const Index old = out.size();
  out.conservativeResize(old + count);
  double w = 0.0;
  Index i = old;
  if (old == 0) {
    if (count == 0) return;
    out[0] = 0.0;
    i = 1;
  } else {
    w = out[old - 1];
  }
  for (; i < old + count; ++i) {
    w += next_increment();
    out[i] = w;
  }
}

SamplePath sample_wiener(const FineGrid& grid, SeedSpec seed) {
  if (grid.steps() < 2) {
    throw ConfigError("Wiener sampling needs a grid with M >= 2 steps");
  }
  WienerStream stream(seed, grid.step());
  Eigen::VectorXd values;
  stream.extend(values, grid.size());
  return SamplePath(grid, std::move(values));
}

SamplePath shifted_subpath(const SamplePath& path, Index from_index, Index to_index) {
  if (from_index < 0 || to_index > path.grid().steps() || from_index >= to_index) {
    throw ArgumentError("shifted_subpath needs 0 <= from < to <= M");
  }
  const Index n = to_index - from_index + 1;
  Eigen::VectorXd values = path.values().segment(from_index, n).array() - path[from_index];
  return SamplePath(path.grid().subgrid(from_index, to_index), std::move(values));
}

}  // namespace fks
