#pragma once

#include "mfsde/brownian.hpp"
#include "mfsde/coefficients.hpp"
#include "mfsde/core.hpp"
#include "mfsde/random.hpp"
#include "mfsde/timegrid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mfsde {

/// Euler states X^h at the nodes of a grid, row k = X^h(kh).
struct EulerPath {
  TimeGrid grid;
  Trajectory states;

  int dim() const noexcept { return static_cast<int>(states.cols()); }
  Vec state(int k) const { return row_point(states, k); }
};

/// x + drift h + diffusion dW, the single arithmetic form shared by every engine.
inline Vec euler_update(const Vec& x, const Vec& drift, const Mat& diffusion, double h, const Vec& dW) {
  return x + drift * h + diffusion * dW;
}

/// x + b(t, x) h + sigma(t, x) dW. Throws NumericFailure (tagged with `step`) on NaN/inf.
Vec euler_step(const DriftField& b, const DiffusionField& sigma, double t, const Vec& x, double h,
               const Vec& dW, int step = 0);

/// Iterates euler_step over the grid of `bm`. Throws if grids or dimensions disagree.
EulerPath simulate_euler(const DriftField& b, const DiffusionField& sigma, const Vec& x0,
                         const TimeGrid& grid, const BrownianPath& bm);

/**
 * Continuous Euler interpolation
 *   X^h_t = X^h_{t_h} + b(t_h, X^h_{t_h}) (t - t_h) + sigma(t_h, X^h_{t_h}) (W_t - W_{t_h}).
 * `fine` must strictly refine the path grid and t must be one of its nodes;
 * no randomness between nodes is ever invented.
 */
Vec interpolate(const EulerPath& path, const DriftField& b, const DiffusionField& sigma,
                const BrownianPath& fine, double t);

/// The interpolation evaluated at every node of `fine` (fine may equal the path grid).
EulerPath interpolate_onto(const EulerPath& path, const DriftField& b, const DiffusionField& sigma,
                           const BrownianPath& fine);

// ---------------------------------------------------------------------------
// Discretized Ito process

struct ItoCoefficients {
  Vec drift;
  Mat diffusion;
};

/**
 * Produces (b_j, sigma_j) for the recursion
 *   xi_{k} = xi_{k-1} + b_{k-1} / N + sigma_{k-1} (W_{k/N} - W_{(k-1)/N}).
 * The evaluator sees only xi_0..xi_j (rows of `history`) and an auxiliary
 * stream private to step j, so adaptedness holds by construction.
 */
struct AdaptedCoefficientRule {
  using Fn = std::function<ItoCoefficients(int j, const Trajectory& history, const CounterRng& aux)>;

  Fn eval;
  double kappa0 = 1.0;
  double kappa1 = 1.0;
  std::string name;
};

struct DiscretizedItoPath {
  int steps = 0;
  Trajectory values;                 ///< (N+1) x d
  Trajectory drift_trace;            ///< N x d, b_j actually used
  std::vector<Mat> diffusion_trace;  ///< N entries, sigma_j actually used

  int dim() const noexcept { return static_cast<int>(values.cols()); }
  Vec value(int k) const { return row_point(values, k); }
};

/// Auxiliary key handed to the rule at step j.
StreamKey aux_key(const StreamKey& base, int step);

/// Runs the recursion on `bm` (N steps of size 1/N). Each (b_j, sigma_j) is
/// audited against the rule's kappa0/kappa1 and BoundViolation is thrown on failure.
DiscretizedItoPath simulate_discretized_ito(const AdaptedCoefficientRule& rule, const Vec& xi0,
                                            const BrownianPath& bm, const StreamKey& aux);

/// Returns the first step whose recorded coefficients break the bounds, or -1.
int find_bound_violation(const DiscretizedItoPath& path, double kappa0, double kappa1);

// ---------------------------------------------------------------------------
// Exact Ornstein-Uhlenbeck oracle

/**
 * dX = -theta X dt + sigma0 dW solved by the variance-exact one-step update
 *   X_{k+1} = e^{-theta h} X_k + sigma0 sqrt((1 - e^{-2 theta h}) / (2 theta h)) dW_k,
 * driven by the same increments as the Euler scheme. theta = 0 gives X_0 + sigma0 W.
 */
EulerPath exact_ou(double theta, const Mat& sigma0, const Vec& x0, const TimeGrid& grid,
                   const BrownianPath& bm);

}  // namespace mfsde
