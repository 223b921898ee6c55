#pragma once

#include "mfsde/brownian.hpp"
#include "mfsde/coefficients.hpp"
#include "mfsde/core.hpp"
#include "mfsde/measure.hpp"
#include "mfsde/parallel.hpp"
#include "mfsde/random.hpp"
#include "mfsde/timegrid.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mfsde {

/// Law of the initial condition: a keyed sampler plus a descriptor.
struct InitialLaw {
  std::function<Vec(const StreamKey&)> sample;
  std::string name;
  std::vector<double> params;
  bool has_lq_loc_density = false;
  int dim = 1;
};

/// Keys used by the engines; the pairing of particle j across ensembles relies on them.
StreamKey particle_key(const StreamKey& master, int j);
StreamKey pool_key(const StreamKey& master, int m);
/// Stream for the initial draw of the particle owning `key` (its noise uses `key` itself).
StreamKey initial_draw_key(const StreamKey& key);

/**
 * N particles on a grid; nodes[k] is the N x d array of positions at t_k.
 * Row j of every node belongs to the particle driven by keys[j].
 */
struct ParticleEnsemble {
  TimeGrid grid;
  std::vector<Trajectory> nodes;
  std::vector<StreamKey> keys;

  int particles() const noexcept { return nodes.empty() ? 0 : static_cast<int>(nodes.front().rows()); }
  int dim() const noexcept { return nodes.empty() ? 0 : static_cast<int>(nodes.front().cols()); }
  const Trajectory& initial() const { return nodes.front(); }
  /// (n+1) x d path of particle j.
  Trajectory trajectory(int j) const;
  EmpiricalMeasure measure_at(int k) const { return EmpiricalMeasure(nodes[static_cast<std::size_t>(k)]); }
};

/**
 * Tracked mean-field Euler copies plus the pool approximating their common law.
 * copies.keys[j] equals the key of particle j in the paired ParticleEnsemble.
 */
struct IidEnsemble {
  ParticleEnsemble copies;
  std::shared_ptr<const ParticleEnsemble> law_pool;
};

/// Draws xi_j = law.sample(initial_draw_key(keys[j])) into an N x d array.
Trajectory draw_initial(const InitialLaw& law, std::span<const StreamKey> keys);

/**
 * Interacting particle Euler system: every particle steps with the kernel
 * averaged over the empirical measure of all particles at the current node
 * (simultaneous update). Particle j is driven by sample_brownian(grid, d, keys[j]).
 */
ParticleEnsemble simulate_particle_system(const InteractionKernel& kernel, const Trajectory& initial,
                                          std::span<const StreamKey> keys, const TimeGrid& grid,
                                          const Exec& exec = {});

/// Keys particle_key(master, j), j < N, initial draws from `law`.
ParticleEnsemble simulate_particle_system(const InteractionKernel& kernel, const InitialLaw& law, int N,
                                          const TimeGrid& grid, const StreamKey& master,
                                          const Exec& exec = {});

/// M self-consistent copies with keys pool_key(master, m); the surrogate for the law.
std::shared_ptr<const ParticleEnsemble> simulate_law_pool(const InteractionKernel& kernel,
                                                          const InitialLaw& law, int M,
                                                          const TimeGrid& grid,
                                                          const StreamKey& master,
                                                          const Exec& exec = {});

/// Copies stepping against the frozen pool measure at each node.
IidEnsemble simulate_mckean(const InteractionKernel& kernel, const Trajectory& initial,
                            std::span<const StreamKey> keys,
                            std::shared_ptr<const ParticleEnsemble> pool, const Exec& exec = {});

/// J copies keyed particle_key(master, j) against a pool already built.
IidEnsemble simulate_mckean(const InteractionKernel& kernel, const InitialLaw& law, int J,
                            std::shared_ptr<const ParticleEnsemble> pool, const StreamKey& master,
                            const Exec& exec = {});

/// Builds a fresh pool of M copies under `master`, then the J tracked copies. Requires M >= J.
IidEnsemble simulate_mckean(const InteractionKernel& kernel, const InitialLaw& law, int J, int M,
                            const TimeGrid& grid, const StreamKey& master, const Exec& exec = {});

}  // namespace mfsde
