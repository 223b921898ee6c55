#pragma once

#include "mfsde/coefficients.hpp"
#include "mfsde/core.hpp"
#include "mfsde/euler.hpp"
#include "mfsde/particles.hpp"
#include "mfsde/random.hpp"
#include "mfsde/stats.hpp"

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mfsde {

struct ErrorEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int replications = 0;
  double h = 0.0;
  int particles = 0;
  std::string model;
};

/**
 * R replicated paths on one grid. `coupling` names the master stream the
 * paths were driven from; pathwise comparisons require equal couplings.
 */
struct PathEnsemble {
  TimeGrid grid;
  std::vector<Trajectory> paths;
  StreamKey coupling;
  std::string model;

  int replications() const noexcept { return static_cast<int>(paths.size()); }
};

/**
 * E sup_nodes |A - B|^2 with the sup taken per replication before averaging.
 * The grids must be nested; comparison happens on the coarser node set.
 * Throws InvalidArgument for different couplings or replication counts.
 */
ErrorEstimate strong_error(const PathEnsemble& a, const PathEnsemble& b);

/// sup over the coarser node set of |a - b|^2 for two paths on nested grids.
double sup_square_difference(const Trajectory& a, const TimeGrid& grid_a, const Trajectory& b,
                             const TimeGrid& grid_b);

/// Per-replication sup_nodes |A - B|^2 (the samples behind strong_error).
std::vector<double> sup_square_differences(const PathEnsemble& a, const PathEnsemble& b);

/**
 * Chaos error max_j E sup_t |X^{N,j} - Xbar^j|^2 over replications r, where
 * particles[r] and copies[r] must share keys (synchronized coupling).
 */
ErrorEstimate strong_error(std::span<const ParticleEnsemble> particles, std::span<const IidEnsemble> copies);

/// sup_t |X^{N,j} - Xbar^j|^2 for every j of one coupled replication.
std::vector<double> chaos_sup_samples(const ParticleEnsemble& particles, const IidEnsemble& copies);

/// max over j of the per-particle means; per_particle[j][r] are the replication samples.
ErrorEstimate worst_particle_error(const std::vector<std::vector<double>>& per_particle);

/// Bounded test function for occupation functionals.
struct BoundedFunction {
  std::function<double(const Vec&)> eval;
  double bound = 0.0;  ///< declared sup |f|; must be positive and finite
  std::string name;
};

/// Samples of h sum_{k<n} f(X_{kh}) = ∫_0^T f(X_{t_h}) dt, one per replication.
std::vector<double> occupation_integrals(const PathEnsemble& ensemble, const BoundedFunction& f);

/// |E∫f(X^h_{t_h}) - E∫f(X^ref_{t_h})| with combined standard error.
ErrorEstimate weak_occupation_error(const PathEnsemble& ensemble, const BoundedFunction& f,
                                    const PathEnsemble& reference);

/// E sup_nodes |X|^beta (beta >= 2).
ErrorEstimate sup_moment(const PathEnsemble& ensemble, double beta);

/// max over node pairs s < t of E|X_s - X_t|^beta / |s - t|^{beta/2} (beta >= 2).
double holder_ratio(const PathEnsemble& ensemble, double beta);

/**
 * E |(1/N) sum_i (b(Xbar^1_t, law) - b̄(Xbar^1_t, Xbar^i_t))|^2 at node k,
 * using the first N tracked copies of each replication and the pool as the
 * law surrogate. Needs kernel.closed_form_drift (else Unsupported).
 */
double kernel_average_deviation_sample(const IidEnsemble& replication, const InteractionKernel& kernel,
                                       int node, int N);

ErrorEstimate kernel_average_deviation(std::span<const IidEnsemble> replications,
                                       const InteractionKernel& kernel, int node, int N);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_std_error = 0.0;  ///< from residuals; zero for an exact fit
  std::vector<std::pair<double, double>> points;  ///< (log x, log y)
};

/// Least-squares line through (log x, log y). Needs >= 3 points, all positive.
RateFit fit_rate(std::span<const std::pair<double, double>> points);

/**
 * Standard error of the least-squares slope of y against u when each y_i
 * carries an independent standard error (slope = sum c_i y_i).
 */
double slope_std_error(std::span<const double> u, std::span<const double> y_std_errors);

/// Converts a PathEnsemble of EulerPaths built by the caller.
PathEnsemble make_path_ensemble(const TimeGrid& grid, std::vector<Trajectory> paths, const StreamKey& coupling,
                                std::string model = {});

/// Pools the per-replication particle paths of particle j into a PathEnsemble.
PathEnsemble particle_path_ensemble(std::span<const ParticleEnsemble> replications, int j,
                                    const StreamKey& coupling, std::string model = {});

}  // namespace mfsde
