#include "mfsde/brownian.hpp"

#include <cmath>
#include <string>

namespace mfsde {

BrownianPath::BrownianPath(TimeGrid grid, Trajectory increments, Trajectory nodes)
    : grid_(grid), increments_(std::move(increments)), nodes_(std::move(nodes)) {
  if (increments_.rows() != grid_.steps() || nodes_.rows() != grid_.steps() + 1 ||
      nodes_.cols() != increments_.cols()) {
    throw InvalidArgument("brownian path arrays do not match the grid");
  }
}

Trajectory prefix_sums(const Trajectory& increments) {
  Trajectory nodes = Trajectory::Zero(increments.rows() + 1, increments.cols());
  for (Eigen::Index k = 0; k < increments.rows(); ++k) {
    nodes.row(k + 1) = nodes.row(k) + increments.row(k);
  }
  return nodes;
}

BrownianPath brownian_from_increments(const TimeGrid& grid, Trajectory increments) {
  Trajectory nodes = prefix_sums(increments);
  return BrownianPath(grid, std::move(increments), std::move(nodes));
}

BrownianPath sample_brownian(const TimeGrid& grid, int dim, const StreamKey& key) {
  if (dim < 1 || dim > kMaxDim) {
    throw InvalidArgument("brownian dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  Trajectory increments(grid.steps(), dim);
  CounterRng rng(key);
  rng.fill_normals(std::span<double>(increments.data(), static_cast<std::size_t>(increments.size())));
  increments *= std::sqrt(grid.step());
  return brownian_from_increments(grid, std::move(increments));
}

BrownianPath coarsen(const BrownianPath& path, int factor) {
  const int n = path.steps();
  if (factor < 1 || n % factor != 0) {
    throw InvalidArgument("coarsening factor " + std::to_string(factor) + " does not divide " +
                          std::to_string(n) + " steps");
  }
  if (factor == 1) return path;
  const int coarse_n = n / factor;
  Trajectory increments(coarse_n, path.dim());
  Trajectory nodes(coarse_n + 1, path.dim());
  for (int k = 0; k < coarse_n; ++k) {
    increments.row(k) = path.increments().row(k * factor);
    for (int j = 1; j < factor; ++j) increments.row(k) += path.increments().row(k * factor + j);
  }
  for (int k = 0; k <= coarse_n; ++k) nodes.row(k) = path.cumulative().row(k * factor);
  return BrownianPath(make_grid(path.grid().horizon(), coarse_n), std::move(increments),
                      std::move(nodes));
}

}  // namespace mfsde
