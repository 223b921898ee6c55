#include "mfsde/catalog.hpp"
#include "mfsde/measure.hpp"
#include "mfsde/particles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace mfsde;

namespace {

Trajectory atoms1(std::initializer_list<double> xs) {
  Trajectory t(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) t(i++, 0) = x;
  return t;
}

std::vector<StreamKey> keys_for(const StreamKey& master, int N) {
  std::vector<StreamKey> keys;
  for (int j = 0; j < N; ++j) keys.push_back(particle_key(master, j));
  return keys;
}

}  // namespace

TEST_CASE("empirical measures") {
  const EmpiricalMeasure mu = empirical(atoms1({1.0, 3.0}));
  CHECK(mu.size() == 2);
  CHECK(mu.weight(0) == 0.5);
  CHECK(mu.weight(1) == 0.5);
  CHECK(mu.atom(1)(0) == 3.0);
  const EmpiricalMeasure dirac = empirical(atoms1({4.0}));
  CHECK(dirac.size() == 1);
  CHECK(dirac.weight(0) == 1.0);
}

TEST_CASE("measure_moment") {
  CHECK(measure_moment(empirical(atoms1({1.0, -1.0})), 2.0) == doctest::Approx(1.0));
  CHECK(measure_moment(empirical(atoms1({0.0, 2.0})), 1.0) == doctest::Approx(1.0));
  CHECK(measure_moment(empirical(atoms1({0.0})), 3.0) == 0.0);
  CHECK_THROWS_AS(measure_moment(empirical(atoms1({0.0})), 0.5), InvalidArgument);
}

TEST_CASE("wasserstein in one dimension") {
  const EmpiricalMeasure a = empirical(atoms1({0.3, -1.0, 2.0}));
  CHECK(wasserstein(a, a, 1) == 0.0);
  CHECK(wasserstein(a, a, 2) == 0.0);
  CHECK(wasserstein(empirical(atoms1({0.0})), empirical(atoms1({1.0})), 1) == 1.0);
  CHECK(wasserstein(empirical(atoms1({0.0, 1.0})), empirical(atoms1({1.0, 2.0})), 1) == doctest::Approx(1.0));
  // unequal counts: {0, 1} vs {0.5}: W1 = 0.5
  CHECK(wasserstein(empirical(atoms1({0.0, 1.0})), empirical(atoms1({0.5})), 1) == doctest::Approx(0.5));
  // {0, 0, 3} vs {0, 3}: move 1/6 mass from 0 to 3 -> W1 = 0.5
  CHECK(wasserstein(empirical(atoms1({0.0, 0.0, 3.0})), empirical(atoms1({0.0, 3.0})), 1) ==
        doctest::Approx(0.5));
  // W2 of {0,1} vs {1,2}: sqrt(mean of 1) = 1
  CHECK(wasserstein(empirical(atoms1({0.0, 1.0})), empirical(atoms1({1.0, 2.0})), 2) == doctest::Approx(1.0));
  Eigen::VectorXd w(2);
  w << 0.3, 0.7;
  CHECK_THROWS_AS(wasserstein(EmpiricalMeasure(atoms1({0.0, 1.0}), w), empirical(atoms1({0.5, 1.0, 2.0})), 1),
                  Unsupported);
  CHECK_THROWS_AS(wasserstein(a, a, 3), InvalidArgument);
}

TEST_CASE("sliced wasserstein in two dimensions") {
  Trajectory p(3, 2);
  p << 0, 0, 1, 2, -1, 0.5;
  Trajectory q = p;
  q.col(0).array() += 1.0;
  const double w = wasserstein(empirical(p), empirical(q), 1);
  CHECK(w > 0.0);
  CHECK(w <= 1.0 + 1e-12);
  CHECK(wasserstein(empirical(p), empirical(p), 1) == 0.0);
  CHECK(wasserstein(empirical(p), empirical(q), 1) == w);
}

TEST_CASE("single particle reduces to self-interaction") {
  const InteractionKernel k = discontinuous_kernel(1);
  const TimeGrid g = make_grid(1.0, 40);
  const StreamKey master(30);
  const ParticleEnsemble ps = simulate_particle_system(k, gaussian_law(0.0, 1.0), 1, g, master);
  // b(x) = sign(x - x) = 0, sigma(x) = sigmā(x, x)
  const DriftField b{[&](double t, const Vec& x) { return k.drift(t, x, x); }, {}};
  const DiffusionField s{[&](double t, const Vec& x) { return k.diffusion(t, x, x); }, {}};
  const EulerPath e = simulate_euler(b, s, row_point(ps.initial(), 0), g, sample_brownian(g, 1, ps.keys[0]));
  CHECK(ps.trajectory(0) == e.states);
}

TEST_CASE("noise-free mean kernel follows explicit Euler for m' = m") {
  InteractionKernel k = mean_kernel(1);
  k.diffusion = [](double, const Vec&, const Vec&) { return Mat(Mat::Zero(1, 1)); };
  const TimeGrid g = make_grid(1.0, 16);
  const ParticleEnsemble ps = simulate_particle_system(k, dirac_law(Vec::Constant(1, 1.0)), 5, g, StreamKey(31));
  double m = 1.0;
  for (int kk = 0; kk <= 16; ++kk) {
    CHECK(ps.nodes[static_cast<std::size_t>(kk)].col(0).mean() == doctest::Approx(m).epsilon(1e-14));
    m *= 1.0 + g.step();
  }
}

TEST_CASE("trajectories start at the initial draws") {
  const TimeGrid g = make_grid(1.0, 8);
  const auto law = uniform_law(0.0, 2.0);
  const auto keys = keys_for(StreamKey(32), 6);
  const ParticleEnsemble ps = simulate_particle_system(discontinuous_kernel(1), law, 6, g, StreamKey(32));
  CHECK(ps.initial() == draw_initial(law, keys));
  CHECK(ps.keys == keys);
}

TEST_CASE("permuting particles and their keys permutes trajectories exactly") {
  const InteractionKernel k = discontinuous_kernel(2);
  const TimeGrid g = make_grid(1.0, 20);
  const int N = 7;
  const auto keys = keys_for(StreamKey(33), N);
  const Trajectory init = draw_initial(gaussian_law(0.0, 1.0, 2), keys);
  const ParticleEnsemble a = simulate_particle_system(k, init, keys, g);

  std::vector<int> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[0], perm[3]);
  std::vector<StreamKey> pkeys;
  Trajectory pinit(N, 2);
  for (int j = 0; j < N; ++j) {
    pkeys.push_back(keys[static_cast<std::size_t>(perm[j])]);
    pinit.row(j) = init.row(perm[j]);
  }
  const ParticleEnsemble b = simulate_particle_system(k, pinit, pkeys, g);
  for (int j = 0; j < N; ++j) {
    // the kernel sums are over a reordered set, so allow a few ulps
    CHECK((b.trajectory(j) - a.trajectory(perm[j])).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const InteractionKernel k = discontinuous_kernel(1);
  const TimeGrid g = make_grid(1.0, 16);
  const auto law = uniform_law(0.0, 2.0);
  const ParticleEnsemble a = simulate_particle_system(k, law, 33, g, StreamKey(34), Exec{1});
  const ParticleEnsemble b = simulate_particle_system(k, law, 33, g, StreamKey(34), Exec{4});
  for (std::size_t n = 0; n < a.nodes.size(); ++n) CHECK(a.nodes[n] == b.nodes[n]);
  const IidEnsemble c = simulate_mckean(k, law, 5, 40, g, StreamKey(34), Exec{1});
  const IidEnsemble d = simulate_mckean(k, law, 5, 40, g, StreamKey(34), Exec{3});
  for (std::size_t n = 0; n < c.copies.nodes.size(); ++n) CHECK(c.copies.nodes[n] == d.copies.nodes[n]);
}

TEST_CASE("y-independent kernel: tracked copies equal plain Euler") {
  InteractionKernel k;
  k.dim = 1;
  k.drift = [](double, const Vec& x, const Vec&) -> Vec { return -x; };
  k.diffusion = [](double, const Vec& x, const Vec&) -> Mat { return Mat::Identity(1, 1) * (1.0 + 0.5 * (x(0) > 0)); };
  k.drift_ignores_y = true;
  k.diffusion_ignores_y = true;
  const TimeGrid g = make_grid(1.0, 32);
  const auto law = gaussian_law(0.5, 1.0);
  const IidEnsemble iid = simulate_mckean(k, law, 4, 16, g, StreamKey(35));
  const DriftField b{[&](double t, const Vec& x) { return k.drift(t, x, x); }, {}};
  const DiffusionField s{[&](double t, const Vec& x) { return k.diffusion(t, x, x); }, {}};
  for (int j = 0; j < 4; ++j) {
    const StreamKey key = iid.copies.keys[static_cast<std::size_t>(j)];
    const EulerPath e = simulate_euler(b, s, law.sample(initial_draw_key(key)), g, sample_brownian(g, 1, key));
    CHECK(iid.copies.trajectory(j) == e.states);
  }
}

TEST_CASE("pool with the tracked keys reproduces the tracked copies") {
  const InteractionKernel k = discontinuous_kernel(1);
  const TimeGrid g = make_grid(1.0, 16);
  const auto law = uniform_law(0.0, 2.0);
  const int J = 6;
  const auto keys = keys_for(StreamKey(36), J);
  const Trajectory init = draw_initial(law, keys);
  auto pool = std::make_shared<const ParticleEnsemble>(simulate_particle_system(k, init, keys, g));
  const IidEnsemble iid = simulate_mckean(k, init, keys, pool);
  for (std::size_t n = 0; n < pool->nodes.size(); ++n) CHECK(iid.copies.nodes[n] == pool->nodes[n]);
}

TEST_CASE("zero interaction strength: particles and copies coincide") {
  const InteractionKernel k = mean_kernel(1, 0.0);
  const TimeGrid g = make_grid(1.0, 32);
  const auto law = uniform_law(0.0, 2.0);
  const StreamKey master(37);
  const ParticleEnsemble ps = simulate_particle_system(k, law, 10, g, master);
  const IidEnsemble iid = simulate_mckean(k, law, 10, 64, g, master);
  CHECK(ps.keys == iid.copies.keys);
  for (std::size_t n = 0; n < ps.nodes.size(); ++n) CHECK(ps.nodes[n] == iid.copies.nodes[n]);
}

TEST_CASE("pool keys are disjoint from tracked keys") {
  const InteractionKernel k = mean_kernel(1);
  const TimeGrid g = make_grid(1.0, 4);
  const IidEnsemble iid = simulate_mckean(k, dirac_law(Vec::Constant(1, 1.0)), 3, 8, g, StreamKey(38));
  for (const auto& a : iid.law_pool->keys) {
    for (const auto& b : iid.copies.keys) CHECK_FALSE(a == b);
  }
  CHECK_THROWS_AS(simulate_mckean(k, dirac_law(Vec::Constant(1, 1.0)), 9, 8, g, StreamKey(38)), InvalidArgument);
  CHECK_THROWS_AS(simulate_particle_system(k, dirac_law(Vec::Constant(1, 1.0)), 0, g, StreamKey(38)),
                  InvalidArgument);
}

TEST_CASE("mean kernel from a point mass: mean at T = 1 near e") {
  // m' = m, m(0) = 1; Euler bias (1 + h)^n - e is about -0.0053 at n = 256
  const TimeGrid g = make_grid(1.0, 256);
  const InteractionKernel k = mean_kernel(1);
  const auto law = dirac_law(Vec::Constant(1, 1.0));
  std::vector<double> means;
  for (int r = 0; r < 20; ++r) {
    const ParticleEnsemble ps = simulate_particle_system(k, law, 512, g, StreamKey(39).with("rep", r));
    means.push_back(ps.nodes.back().col(0).mean());
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  const double se = std::sqrt(ss / (means.size() - 1) / means.size());
  const double euler = std::pow(1.0 + g.step(), 256);
  CHECK(std::abs(m - euler) <= 3.0 * se);
  CHECK(std::abs(m - std::exp(1.0)) <= 3.0 * se + std::abs(std::exp(1.0) - euler));
}
