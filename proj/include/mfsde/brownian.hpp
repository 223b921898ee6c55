#pragma once

#include "mfsde/core.hpp"
#include "mfsde/random.hpp"
#include "mfsde/timegrid.hpp"

namespace mfsde {

/**
 * Brownian increments on a TimeGrid together with the node values W(k h).
 *
 * For a sampled path W(k) is the left-to-right prefix sum of the increments.
 * A coarsened path keeps the node values of its parent at the shared nodes,
 * so W agrees bit-for-bit across resolutions; its increments are the block
 * sums of the parent increments.
 */
class BrownianPath {
 public:
  BrownianPath(TimeGrid grid, Trajectory increments, Trajectory nodes);

  const TimeGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return static_cast<int>(increments_.cols()); }
  int steps() const noexcept { return grid_.steps(); }

  /// n x d, row k holds W((k+1)h) - W(kh).
  const Trajectory& increments() const noexcept { return increments_; }
  Vec increment(int k) const { return row_point(increments_, k); }

  /// (n+1) x d node values, row 0 is zero.
  const Trajectory& cumulative() const noexcept { return nodes_; }
  Vec cumulative(int k) const { return row_point(nodes_, k); }

 private:
  TimeGrid grid_;
  Trajectory increments_;
  Trajectory nodes_;
};

/// Left-to-right prefix sums with a zero first row.
Trajectory prefix_sums(const Trajectory& increments);

/// Builds a path from explicit increments (node values by prefix sums).
BrownianPath brownian_from_increments(const TimeGrid& grid, Trajectory increments);

/// n x dim increments of variance h, fully determined by `key`.
BrownianPath sample_brownian(const TimeGrid& grid, int dim, const StreamKey& key);

/// Block sums of `factor` consecutive increments. Throws unless factor divides n.
BrownianPath coarsen(const BrownianPath& path, int factor);

}  // namespace mfsde
