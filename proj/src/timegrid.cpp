#include "mfsde/timegrid.hpp"

#include "mfsde/core.hpp"

#include <cmath>
#include <string>

namespace mfsde {

TimeGrid::TimeGrid(double horizon, int steps)
    : horizon_(horizon), steps_(steps), step_(horizon / steps) {}

TimeGrid make_grid(double horizon, int steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("time grid horizon must be positive, got " + std::to_string(horizon));
  }
  if (steps < 1) {
    throw InvalidArgument("time grid needs at least one step, got " + std::to_string(steps));
  }
  return TimeGrid(horizon, steps);
}

double TimeGrid::node(int k) const {
  if (k < 0 || k > steps_) throw OutOfRange("node index " + std::to_string(k) + " outside grid");
  if (k == steps_) return horizon_;
  return k * step_;
}

int TimeGrid::floor_index(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw OutOfRange("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon_) + "]");
  }
  if (t == horizon_) return steps_;
  auto k = static_cast<int>(std::floor(t / step_));
  // t/h can land one ulp on the wrong side of an integer
  if (k > steps_) k = steps_;
  if (k > 0 && node(k) > t) --k;
  if (k < steps_ && node(k + 1) <= t) ++k;
  return k;
}

double floor_time(const TimeGrid& grid, double t) { return grid.node(grid.floor_index(t)); }

bool refines(const TimeGrid& fine, const TimeGrid& coarse) {
  return fine.horizon() == coarse.horizon() && fine.steps() % coarse.steps() == 0;
}

}  // namespace mfsde
