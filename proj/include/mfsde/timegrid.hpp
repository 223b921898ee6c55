#pragma once

namespace mfsde {

/// Uniform partition of [0, T] into n steps of size h = T / n.
class TimeGrid {
 public:
  TimeGrid() = default;

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  double step() const noexcept { return step_; }

  /// k * h, with node(n) pinned to T.
  double node(int k) const;

  /// Index of the node t_h = [t/h] h, with T mapped to n.
  int floor_index(double t) const;

  bool operator==(const TimeGrid&) const = default;

  friend TimeGrid make_grid(double horizon, int steps);

 private:
  TimeGrid(double horizon, int steps);

  double horizon_ = 1.0;
  int steps_ = 1;
  double step_ = 1.0;
};

/// Throws InvalidArgument unless horizon > 0 and steps >= 1.
TimeGrid make_grid(double horizon, int steps);

/// t_h = [t/h] h. Throws OutOfRange for t outside [0, T].
double floor_time(const TimeGrid& grid, double t);

/// True when `fine` refines `coarse` by an integer factor (same horizon).
bool refines(const TimeGrid& fine, const TimeGrid& coarse);

}  // namespace mfsde
