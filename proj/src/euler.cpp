#include "mfsde/euler.hpp"

#include <cmath>
#include <sstream>

namespace mfsde {

Vec euler_step(const DriftField& b, const DiffusionField& sigma, double t, const Vec& x, double h,
               const Vec& dW, int step) {
  if (!(h > 0.0)) throw InvalidArgument("euler step needs h > 0");
  const Vec drift = b(t, x);
  const Mat diffusion = sigma(t, x);
  if (!all_finite(drift) || !all_finite(diffusion)) throw NumericFailure(step, t, x);
  Vec next = euler_update(x, drift, diffusion, h, dW);
  if (!all_finite(next)) throw NumericFailure(step, t, x);
  return next;
}

EulerPath simulate_euler(const DriftField& b, const DiffusionField& sigma, const Vec& x0,
                         const TimeGrid& grid, const BrownianPath& bm) {
  if (!(bm.grid() == grid)) throw InvalidArgument("brownian path is on a different grid");
  if (bm.dim() != x0.size()) throw InvalidArgument("initial state and noise dimensions differ");
  EulerPath path{grid, Trajectory(grid.steps() + 1, x0.size())};
  path.states.row(0) = x0.transpose();
  Vec x = x0;
  const double h = grid.step();
  for (int k = 0; k < grid.steps(); ++k) {
    x = euler_step(b, sigma, grid.node(k), x, h, bm.increment(k), k);
    path.states.row(k + 1) = x.transpose();
  }
  return path;
}

namespace {

int fine_node_index(const TimeGrid& fine, double t) {
  const int m = fine.floor_index(t);
  if (fine.node(m) != t) {
    std::ostringstream os;
    os << "t=" << t << " is not a node of the driving grid (h=" << fine.step() << ")";
    throw InvalidArgument(os.str());
  }
  return m;
}

Vec interpolate_at(const EulerPath& path, const DriftField& b, const DiffusionField& sigma,
                   const BrownianPath& fine, int factor, int m) {
  const int k = std::min(m / factor, path.grid.steps());
  if (k * factor == m) return path.state(k);
  const double tk = path.grid.node(k);
  const Vec xk = path.state(k);
  const Vec dW = fine.cumulative(m) - fine.cumulative(k * factor);
  return xk + b(tk, xk) * (fine.grid().node(m) - tk) + sigma(tk, xk) * dW;
}

}  // namespace

Vec interpolate(const EulerPath& path, const DriftField& b, const DiffusionField& sigma,
                const BrownianPath& fine, double t) {
  if (!refines(fine.grid(), path.grid) || fine.steps() == path.grid.steps()) {
    throw InvalidArgument("interpolation needs a strictly finer driving path");
  }
  const int m = fine_node_index(fine.grid(), t);
  return interpolate_at(path, b, sigma, fine, fine.steps() / path.grid.steps(), m);
}

EulerPath interpolate_onto(const EulerPath& path, const DriftField& b, const DiffusionField& sigma,
                           const BrownianPath& fine) {
  if (!refines(fine.grid(), path.grid)) {
    throw InvalidArgument("driving path does not refine the euler grid");
  }
  const int factor = fine.steps() / path.grid.steps();
  if (factor == 1) return path;
  EulerPath out{fine.grid(), Trajectory(fine.steps() + 1, path.dim())};
  for (int m = 0; m <= fine.steps(); ++m) {
    out.states.row(m) = interpolate_at(path, b, sigma, fine, factor, m).transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------

StreamKey aux_key(const StreamKey& base, int step) { return base.with("aux", step); }

namespace {

void check_bounds(int j, const ItoCoefficients& c, double kappa0, double kappa1) {
  constexpr double kSlack = 1e-12;
  if (!all_finite(c.drift) || !all_finite(c.diffusion)) {
    throw BoundViolation(j, "non-finite coefficient");
  }
  if (c.drift.norm() > kappa0 * (1.0 + kSlack)) {
    throw BoundViolation(j, "|b_j| = " + std::to_string(c.drift.norm()) + " exceeds kappa0");
  }
  const double norm = operator_norm(c.diffusion);
  if (norm > kappa0 * (1.0 + kSlack)) {
    throw BoundViolation(j, "||sigma_j|| = " + std::to_string(norm) + " exceeds kappa0");
  }
  const double det = gram_determinant(c.diffusion);
  if (det < kappa1 * (1.0 - kSlack)) {
    throw BoundViolation(j, "det(sigma_j sigma_j^T) = " + std::to_string(det) + " below kappa1");
  }
}

}  // namespace

DiscretizedItoPath simulate_discretized_ito(const AdaptedCoefficientRule& rule, const Vec& xi0,
                                            const BrownianPath& bm, const StreamKey& aux) {
  const int n = bm.steps();
  const int d = bm.dim();
  if (xi0.size() != d) throw InvalidArgument("initial value and noise dimensions differ");
  if (std::abs(bm.grid().step() * n - 1.0) > 1e-12) {
    throw InvalidArgument("discretized ito process runs on the unit interval with step 1/N");
  }
  DiscretizedItoPath path;
  path.steps = n;
  path.values.resize(n + 1, d);
  path.drift_trace.resize(n, d);
  path.diffusion_trace.reserve(static_cast<std::size_t>(n));
  path.values.row(0) = xi0.transpose();

  Trajectory history(0, d);
  for (int j = 0; j < n; ++j) {
    history = path.values.topRows(j + 1);
    const ItoCoefficients c = rule.eval(j, history, CounterRng(aux_key(aux, j)));
    if (c.drift.size() != d || c.diffusion.rows() != d || c.diffusion.cols() != d) {
      throw InvalidArgument("adapted rule returned coefficients of the wrong shape");
    }
    check_bounds(j, c, rule.kappa0, rule.kappa1);
    path.drift_trace.row(j) = c.drift.transpose();
    path.diffusion_trace.push_back(c.diffusion);
    const Vec next = path.value(j) + c.drift / static_cast<double>(n) + c.diffusion * bm.increment(j);
    path.values.row(j + 1) = next.transpose();
  }
  return path;
}

int find_bound_violation(const DiscretizedItoPath& path, double kappa0, double kappa1) {
  for (int j = 0; j < path.steps; ++j) {
    try {
      check_bounds(j, {row_point(path.drift_trace, j), path.diffusion_trace[j]}, kappa0, kappa1);
    } catch (const BoundViolation&) {
      return j;
    }
  }
  return -1;
}

// ---------------------------------------------------------------------------

EulerPath exact_ou(double theta, const Mat& sigma0, const Vec& x0, const TimeGrid& grid,
                   const BrownianPath& bm) {
  if (!(bm.grid() == grid)) throw InvalidArgument("brownian path is on a different grid");
  if (bm.dim() != x0.size() || sigma0.rows() != x0.size() || sigma0.cols() != x0.size()) {
    throw InvalidArgument("dimension mismatch in exact OU");
  }
  const double h = grid.step();
  const double decay = std::exp(-theta * h);
  // sqrt((1 - e^{-2 theta h}) / (2 theta h)) -> 1 as theta h -> 0
  const double scale = theta == 0.0 ? 1.0 : std::sqrt(-std::expm1(-2.0 * theta * h) / (2.0 * theta * h));
  EulerPath path{grid, Trajectory(grid.steps() + 1, x0.size())};
  path.states.row(0) = x0.transpose();
  if (theta == 0.0) {
    for (int k = 0; k <= grid.steps(); ++k) {
      path.states.row(k) = (x0 + sigma0 * bm.cumulative(k)).transpose();
    }
    return path;
  }
  Vec x = x0;
  for (int k = 0; k < grid.steps(); ++k) {
    x = decay * x + scale * (sigma0 * bm.increment(k));
    path.states.row(k + 1) = x.transpose();
  }
  return path;
}

}  // namespace mfsde
