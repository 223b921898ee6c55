#include "mfsde/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace mfsde {

PathEnsemble make_path_ensemble(const TimeGrid& grid, std::vector<Trajectory> paths, const StreamKey& coupling,
                                std::string model) {
  for (const auto& p : paths) {
    if (p.rows() != grid.steps() + 1) throw InvalidArgument("path length does not match the grid");
  }
  return {grid, std::move(paths), coupling, std::move(model)};
}

PathEnsemble particle_path_ensemble(std::span<const ParticleEnsemble> replications, int j,
                                    const StreamKey& coupling, std::string model) {
  if (replications.empty()) throw InvalidArgument("no replications");
  std::vector<Trajectory> paths;
  paths.reserve(replications.size());
  for (const auto& rep : replications) paths.push_back(rep.trajectory(j));
  return make_path_ensemble(replications.front().grid, std::move(paths), coupling, std::move(model));
}

// ---------------------------------------------------------------------------
// Strong error

double sup_square_difference(const Trajectory& a, const TimeGrid& grid_a, const Trajectory& b,
                             const TimeGrid& grid_b) {
  const bool a_coarse = grid_a.steps() <= grid_b.steps();
  const TimeGrid& coarse = a_coarse ? grid_a : grid_b;
  const TimeGrid& fine = a_coarse ? grid_b : grid_a;
  if (!refines(fine, coarse)) throw InvalidArgument("path grids are not nested");
  const Trajectory& pc = a_coarse ? a : b;
  const Trajectory& pf = a_coarse ? b : a;
  if (pc.cols() != pf.cols()) throw InvalidArgument("path dimensions differ");
  if (pc.rows() != coarse.steps() + 1 || pf.rows() != fine.steps() + 1) {
    throw InvalidArgument("path length does not match its grid");
  }
  const int factor = fine.steps() / coarse.steps();
  double worst = 0.0;
  for (int k = 0; k <= coarse.steps(); ++k) {
    worst = std::max(worst, (pc.row(k) - pf.row(k * factor)).squaredNorm());
  }
  return worst;
}

std::vector<double> sup_square_differences(const PathEnsemble& a, const PathEnsemble& b) {
  if (!(a.coupling == b.coupling)) {
    throw InvalidArgument("strong error needs coupled ensembles (" + a.coupling.to_string() + " vs " +
                          b.coupling.to_string() + ")");
  }
  if (a.replications() != b.replications()) throw InvalidArgument("replication counts differ");
  if (a.replications() == 0) throw InvalidArgument("empty ensembles");
  std::vector<double> sups(a.paths.size());
  for (std::size_t r = 0; r < a.paths.size(); ++r) {
    sups[r] = sup_square_difference(a.paths[r], a.grid, b.paths[r], b.grid);
  }
  return sups;
}

ErrorEstimate strong_error(const PathEnsemble& a, const PathEnsemble& b) {
  const auto sups = sup_square_differences(a, b);
  const Estimate e = mean_estimate(sups);
  return {e.value, e.std_error, e.replications, std::max(a.grid.step(), b.grid.step()), 0, a.model};
}

std::vector<double> chaos_sup_samples(const ParticleEnsemble& particles, const IidEnsemble& copies) {
  const ParticleEnsemble& c = copies.copies;
  if (particles.keys != c.keys) throw InvalidArgument("particle and mean-field ensembles are not coupled");
  if (!(particles.grid == c.grid) || particles.particles() != c.particles() || particles.dim() != c.dim()) {
    throw InvalidArgument("particle and mean-field ensembles have different shapes");
  }
  std::vector<double> out(static_cast<std::size_t>(particles.particles()), 0.0);
  for (std::size_t k = 0; k < particles.nodes.size(); ++k) {
    const Trajectory diff = particles.nodes[k] - c.nodes[k];
    for (Eigen::Index j = 0; j < diff.rows(); ++j) {
      out[static_cast<std::size_t>(j)] = std::max(out[static_cast<std::size_t>(j)], diff.row(j).squaredNorm());
    }
  }
  return out;
}

ErrorEstimate worst_particle_error(const std::vector<std::vector<double>>& per_particle) {
  if (per_particle.empty()) throw InvalidArgument("no particles");
  Estimate best;
  for (std::size_t j = 0; j < per_particle.size(); ++j) {
    const Estimate e = mean_estimate(per_particle[j]);
    if (j == 0 || e.value > best.value) best = e;
  }
  return {best.value, best.std_error, best.replications, 0.0, static_cast<int>(per_particle.size()), {}};
}

ErrorEstimate strong_error(std::span<const ParticleEnsemble> particles, std::span<const IidEnsemble> copies) {
  if (particles.size() != copies.size() || particles.empty()) {
    throw InvalidArgument("chaos error needs matching, nonempty replication lists");
  }
  const auto n_particles = static_cast<std::size_t>(particles.front().particles());
  std::vector<std::vector<double>> per_particle(n_particles, std::vector<double>(particles.size()));
  for (std::size_t r = 0; r < particles.size(); ++r) {
    const auto sups = chaos_sup_samples(particles[r], copies[r]);
    if (sups.size() != n_particles) throw InvalidArgument("replications have different particle counts");
    for (std::size_t j = 0; j < n_particles; ++j) per_particle[j][r] = sups[j];
  }
  ErrorEstimate out = worst_particle_error(per_particle);
  out.h = particles.front().grid.step();
  return out;
}

// ---------------------------------------------------------------------------
// Weak error, moments

std::vector<double> occupation_integrals(const PathEnsemble& ensemble, const BoundedFunction& f) {
  if (!(f.bound > 0.0) || !std::isfinite(f.bound)) {
    throw Unsupported("weak occupation error needs a declared finite bound for '" + f.name + "'");
  }
  const double h = ensemble.grid.step();
  std::vector<double> out;
  out.reserve(ensemble.paths.size());
  for (const auto& path : ensemble.paths) {
    double acc = 0.0;
    for (int k = 0; k < ensemble.grid.steps(); ++k) acc += f.eval(row_point(path, k));
    out.push_back(h * acc);
  }
  return out;
}

ErrorEstimate weak_occupation_error(const PathEnsemble& ensemble, const BoundedFunction& f,
                                    const PathEnsemble& reference) {
  const Estimate a = mean_estimate(occupation_integrals(ensemble, f));
  const Estimate b = mean_estimate(occupation_integrals(reference, f));
  return {std::abs(a.value - b.value), combined_stderr(a, b), a.replications, ensemble.grid.step(), 0,
          ensemble.model};
}

ErrorEstimate sup_moment(const PathEnsemble& ensemble, double beta) {
  if (beta < 2.0) throw InvalidArgument("sup_moment needs beta >= 2");
  std::vector<double> samples;
  samples.reserve(ensemble.paths.size());
  for (const auto& path : ensemble.paths) {
    const double worst = path.rowwise().norm().maxCoeff();
    samples.push_back(std::pow(worst, beta));
  }
  const Estimate e = mean_estimate(samples);
  return {e.value, e.std_error, e.replications, ensemble.grid.step(), 0, ensemble.model};
}

double holder_ratio(const PathEnsemble& ensemble, double beta) {
  if (beta < 2.0) throw InvalidArgument("holder_ratio needs beta >= 2");
  const int n = ensemble.grid.steps();
  if (ensemble.paths.empty()) throw InvalidArgument("empty ensemble");
  const double count = static_cast<double>(ensemble.paths.size());
  double best = 0.0;
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t <= n; ++t) {
      double acc = 0.0;
      for (const auto& path : ensemble.paths) acc += std::pow((path.row(t) - path.row(s)).norm(), beta);
      const double gap = ensemble.grid.node(t) - ensemble.grid.node(s);
      best = std::max(best, (acc / count) / std::pow(gap, 0.5 * beta));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Kernel average deviation

double kernel_average_deviation_sample(const IidEnsemble& rep, const InteractionKernel& kernel, int node,
                                       int N) {
  if (!kernel.closed_form_drift) throw Unsupported("kernel has no closed-form mean-field drift");
  if (N < 1) throw InvalidArgument("N must be >= 1");
  const ParticleEnsemble& copies = rep.copies;
  if (N > copies.particles()) throw InvalidArgument("N exceeds the tracked copy count");
  if (!rep.law_pool) throw InvalidArgument("ensemble has no law pool");
  const double t = copies.grid.node(node);
  const Trajectory& positions = copies.nodes.at(static_cast<std::size_t>(node));
  const Vec x = row_point(positions, 0);
  const Vec law_drift = kernel.closed_form_drift(t, x, rep.law_pool->measure_at(node));
  Vec acc = law_drift - kernel.drift(t, x, row_point(positions, 0));
  for (int i = 1; i < N; ++i) acc += law_drift - kernel.drift(t, x, row_point(positions, i));
  return (acc / static_cast<double>(N)).squaredNorm();
}

ErrorEstimate kernel_average_deviation(std::span<const IidEnsemble> replications,
                                       const InteractionKernel& kernel, int node, int N) {
  if (replications.empty()) throw InvalidArgument("no replications");
  std::vector<double> samples;
  samples.reserve(replications.size());
  for (const auto& rep : replications) samples.push_back(kernel_average_deviation_sample(rep, kernel, node, N));
  const Estimate e = mean_estimate(samples);
  return {e.value, e.std_error, e.replications, replications.front().copies.grid.step(), N, {}};
}

// ---------------------------------------------------------------------------
// Rate fitting

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw InvalidArgument("rate fit needs at least 3 points");
  RateFit fit;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw InvalidArgument("rate fit needs positive x and y");
    fit.points.emplace_back(std::log(x), std::log(y));
  }
  const auto n = static_cast<double>(fit.points.size());
  double mu = 0.0;
  double mv = 0.0;
  for (const auto& [u, v] : fit.points) {
    mu += u;
    mv += v;
  }
  mu /= n;
  mv /= n;
  double suu = 0.0;
  double suv = 0.0;
  double svv = 0.0;
  for (const auto& [u, v] : fit.points) {
    suu += (u - mu) * (u - mu);
    suv += (u - mu) * (v - mv);
    svv += (v - mv) * (v - mv);
  }
  if (suu == 0.0) throw InvalidArgument("rate fit needs at least two distinct x values");
  fit.slope = suv / suu;
  fit.intercept = mv - fit.slope * mu;
  double ssr = 0.0;
  for (const auto& [u, v] : fit.points) {
    const double res = v - (fit.intercept + fit.slope * u);
    ssr += res * res;
  }
  fit.r_squared = svv > 0.0 ? std::clamp(1.0 - ssr / svv, 0.0, 1.0) : 1.0;
  fit.slope_std_error = std::sqrt(ssr / (n - 2.0) / suu);
  return fit;
}

double slope_std_error(std::span<const double> u, std::span<const double> y_std_errors) {
  if (u.size() != y_std_errors.size() || u.size() < 2) throw InvalidArgument("slope error needs matching data");
  double mu = 0.0;
  for (double v : u) mu += v;
  mu /= static_cast<double>(u.size());
  double suu = 0.0;
  for (double v : u) suu += (v - mu) * (v - mu);
  double var = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double c = (u[i] - mu) / suu;
    var += c * c * y_std_errors[i] * y_std_errors[i];
  }
  return std::sqrt(var);
}

}  // namespace mfsde
