#include "mfsde/particles.hpp"

#include "mfsde/euler.hpp"

#include <string>

namespace mfsde {

StreamKey particle_key(const StreamKey& master, int j) { return master.with("particle", j); }
StreamKey pool_key(const StreamKey& master, int m) { return master.with("pool", m); }
StreamKey initial_draw_key(const StreamKey& key) { return key.with("init", 0); }

Trajectory ParticleEnsemble::trajectory(int j) const {
  Trajectory out(static_cast<Eigen::Index>(nodes.size()), dim());
  for (std::size_t k = 0; k < nodes.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = nodes[k].row(j);
  return out;
}

Trajectory draw_initial(const InitialLaw& law, std::span<const StreamKey> keys) {
  Trajectory out(static_cast<Eigen::Index>(keys.size()), law.dim);
  for (std::size_t j = 0; j < keys.size(); ++j) {
    const Vec x = law.sample(initial_draw_key(keys[j]));
    if (x.size() != law.dim) throw InvalidArgument("initial law returned a point of the wrong size");
    out.row(static_cast<Eigen::Index>(j)) = x.transpose();
  }
  return out;
}

namespace {

std::vector<BrownianPath> sample_drivers(const TimeGrid& grid, int dim, std::span<const StreamKey> keys,
                                         const Exec& exec) {
  std::vector<std::optional<BrownianPath>> slots(keys.size());
  parallel_for(exec, keys.size(), [&](std::size_t j) { slots[j] = sample_brownian(grid, dim, keys[j]); });
  std::vector<BrownianPath> out;
  out.reserve(keys.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/**
 * Advances every row of `current` one Euler step against the measure whose
 * atoms are `reference` (all frozen at node k). Writes disjoint rows of `next`.
 */
void step_against(const InteractionKernel& kernel, const TimeGrid& grid, int k, const Trajectory& current,
                  const Trajectory& reference, const std::vector<BrownianPath>& drivers, Trajectory& next,
                  const Exec& exec) {
  const double t = grid.node(k);
  const double h = grid.step();
  const Eigen::Index n = current.rows();

  // Averages that do not read x are the same for every particle; evaluate once.
  std::optional<Vec> shared_drift;
  std::optional<Mat> shared_diffusion;
  if (kernel.drift_ignores_x) shared_drift = average_drift(kernel, t, row_point(current, 0), reference);
  if (kernel.diffusion_ignores_x) {
    shared_diffusion = average_diffusion(kernel, t, row_point(current, 0), reference);
  }

  parallel_for(exec, static_cast<std::size_t>(n), [&](std::size_t j) {
    const auto row = static_cast<Eigen::Index>(j);
    const Vec x = row_point(current, row);
    const Vec drift = shared_drift ? *shared_drift : average_drift(kernel, t, x, reference);
    const Mat diffusion = shared_diffusion ? *shared_diffusion : average_diffusion(kernel, t, x, reference);
    if (!all_finite(drift) || !all_finite(diffusion)) throw NumericFailure(k, t, x, static_cast<int>(j));
    const Vec moved = euler_update(x, drift, diffusion, h, drivers[j].increment(k));
    if (!all_finite(moved)) throw NumericFailure(k, t, x, static_cast<int>(j));
    next.row(row) = moved.transpose();
  });
}

void check_keys(const Trajectory& initial, std::span<const StreamKey> keys, const InteractionKernel& kernel) {
  if (initial.rows() == 0) throw InvalidArgument("particle system needs at least one particle");
  if (static_cast<std::size_t>(initial.rows()) != keys.size()) {
    throw InvalidArgument("one stream key per particle required");
  }
  if (initial.cols() != kernel.dim) throw InvalidArgument("initial positions do not match kernel dimension");
}

}  // namespace

ParticleEnsemble simulate_particle_system(const InteractionKernel& kernel, const Trajectory& initial,
                                          std::span<const StreamKey> keys, const TimeGrid& grid,
                                          const Exec& exec) {
  check_keys(initial, keys, kernel);
  const auto drivers = sample_drivers(grid, kernel.dim, keys, exec);
  ParticleEnsemble out{grid, {}, std::vector<StreamKey>(keys.begin(), keys.end())};
  out.nodes.reserve(static_cast<std::size_t>(grid.steps()) + 1);
  out.nodes.push_back(initial);
  for (int k = 0; k < grid.steps(); ++k) {
    Trajectory next(initial.rows(), initial.cols());
    step_against(kernel, grid, k, out.nodes.back(), out.nodes.back(), drivers, next, exec);
    out.nodes.push_back(std::move(next));
  }
  return out;
}

ParticleEnsemble simulate_particle_system(const InteractionKernel& kernel, const InitialLaw& law, int N,
                                          const TimeGrid& grid, const StreamKey& master, const Exec& exec) {
  if (N < 1) throw InvalidArgument("particle count must be >= 1");
  std::vector<StreamKey> keys;
  keys.reserve(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) keys.push_back(particle_key(master, j));
  return simulate_particle_system(kernel, draw_initial(law, keys), keys, grid, exec);
}

std::shared_ptr<const ParticleEnsemble> simulate_law_pool(const InteractionKernel& kernel,
                                                          const InitialLaw& law, int M,
                                                          const TimeGrid& grid, const StreamKey& master,
                                                          const Exec& exec) {
  if (M < 1) throw InvalidArgument("law pool size must be >= 1");
  std::vector<StreamKey> keys;
  keys.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) keys.push_back(pool_key(master, m));
  return std::make_shared<const ParticleEnsemble>(
      simulate_particle_system(kernel, draw_initial(law, keys), keys, grid, exec));
}

IidEnsemble simulate_mckean(const InteractionKernel& kernel, const Trajectory& initial,
                            std::span<const StreamKey> keys, std::shared_ptr<const ParticleEnsemble> pool,
                            const Exec& exec) {
  check_keys(initial, keys, kernel);
  if (!pool || pool->nodes.empty()) throw InvalidArgument("mean-field copies need a law pool");
  if (pool->dim() != kernel.dim) throw InvalidArgument("law pool dimension differs from kernel");
  const TimeGrid& grid = pool->grid;
  const auto drivers = sample_drivers(grid, kernel.dim, keys, exec);
  IidEnsemble out{{grid, {}, std::vector<StreamKey>(keys.begin(), keys.end())}, pool};
  out.copies.nodes.reserve(static_cast<std::size_t>(grid.steps()) + 1);
  out.copies.nodes.push_back(initial);
  for (int k = 0; k < grid.steps(); ++k) {
    Trajectory next(initial.rows(), initial.cols());
    step_against(kernel, grid, k, out.copies.nodes.back(), pool->nodes[static_cast<std::size_t>(k)],
                 drivers, next, exec);
    out.copies.nodes.push_back(std::move(next));
  }
  return out;
}

IidEnsemble simulate_mckean(const InteractionKernel& kernel, const InitialLaw& law, int J,
                            std::shared_ptr<const ParticleEnsemble> pool, const StreamKey& master,
                            const Exec& exec) {
  if (J < 1) throw InvalidArgument("tracked copy count must be >= 1");
  std::vector<StreamKey> keys;
  keys.reserve(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) keys.push_back(particle_key(master, j));
  return simulate_mckean(kernel, draw_initial(law, keys), keys, std::move(pool), exec);
}

IidEnsemble simulate_mckean(const InteractionKernel& kernel, const InitialLaw& law, int J, int M,
                            const TimeGrid& grid, const StreamKey& master, const Exec& exec) {
  if (J < 1) throw InvalidArgument("tracked copy count must be >= 1");
  if (M < J) {
    throw InvalidArgument("law pool size M=" + std::to_string(M) + " is smaller than J=" + std::to_string(J));
  }
  auto pool = simulate_law_pool(kernel, law, M, grid, master, exec);
  return simulate_mckean(kernel, law, J, std::move(pool), master, exec);
}

}  // namespace mfsde
