#include "mfsde/catalog.hpp"
#include "mfsde/diagnostics.hpp"

#include <doctest.h>

#include <cmath>

using namespace mfsde;

namespace {

Trajectory column(std::initializer_list<double> xs) {
  Trajectory t(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) t(i++, 0) = x;
  return t;
}

PathEnsemble ou_ensemble(int n, int R, const StreamKey& coupling, int finest = 0) {
  const SdeModel ou = ou_model(1.0, 1.0);
  const TimeGrid g = make_grid(1.0, n);
  std::vector<Trajectory> paths;
  for (int r = 0; r < R; ++r) {
    const StreamKey key = coupling.with("path", r);
    const BrownianPath bm = finest > 0 ? coarsen(sample_brownian(make_grid(1.0, finest), 1, key), finest / n)
                                       : sample_brownian(g, 1, key);
    paths.push_back(simulate_euler(ou.drift, ou.diffusion, Vec::Constant(1, 1.0), g, bm).states);
  }
  return make_path_ensemble(g, std::move(paths), coupling, "ou");
}

}  // namespace

TEST_CASE("strong error identities") {
  const PathEnsemble a = ou_ensemble(16, 30, StreamKey(50));
  CHECK(strong_error(a, a).value == 0.0);

  PathEnsemble shifted = a;
  for (auto& p : shifted.paths) p.array() += 0.25;
  const ErrorEstimate e = strong_error(a, shifted);
  CHECK(e.value == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(e.std_error <= 1e-12);

  const PathEnsemble b = ou_ensemble(32, 30, StreamKey(50), 32);
  CHECK(strong_error(a, b).value == strong_error(b, a).value);

  PathEnsemble other = a;
  other.coupling = StreamKey(51);
  CHECK_THROWS_AS(strong_error(a, other), InvalidArgument);

  PathEnsemble fewer = a;
  fewer.paths.pop_back();
  CHECK_THROWS_AS(strong_error(a, fewer), InvalidArgument);
}

TEST_CASE("sup is taken per replication before averaging") {
  // replication 1 differs only at node 1, replication 2 only at node 2:
  // E sup |d|^2 = (1 + 4) / 2 = 2.5, while sup_t E|d|^2 = max(0.5, 2) = 2
  const TimeGrid g = make_grid(1.0, 2);
  const StreamKey c(52);
  const PathEnsemble a = make_path_ensemble(g, {column({0, 0, 0}), column({0, 0, 0})}, c);
  const PathEnsemble b = make_path_ensemble(g, {column({0, 1, 0}), column({0, 0, 2})}, c);
  CHECK(strong_error(a, b).value == 2.5);
}

TEST_CASE("nested grids are compared on common nodes") {
  const TimeGrid coarse = make_grid(1.0, 2);
  const TimeGrid fine = make_grid(1.0, 4);
  // fine path deviates only off the coarse nodes
  CHECK(sup_square_difference(column({0, 0, 0}), coarse, column({0, 9, 1, 9, 0}), fine) == 1.0);
  CHECK_THROWS_AS(sup_square_difference(column({0, 0, 0}), coarse, column({0, 0, 0, 0}), make_grid(1.0, 3)),
                  InvalidArgument);
}

TEST_CASE("OU self-convergence: h vs h/2 errors positive and decreasing") {
  const int finest = 256;
  double prev = 1e9;
  for (int n : {16, 32, 64, 128}) {
    const PathEnsemble a = ou_ensemble(n, 300, StreamKey(53), finest);
    const PathEnsemble b = ou_ensemble(2 * n, 300, StreamKey(53), finest);
    const ErrorEstimate e = strong_error(a, b);
    CHECK(e.value > 0.0);
    CHECK(e.value < prev);
    prev = e.value;
  }
}

TEST_CASE("weak occupation error") {
  const PathEnsemble a = ou_ensemble(16, 50, StreamKey(54));
  const PathEnsemble b = ou_ensemble(64, 50, StreamKey(55));
  const BoundedFunction c{[](const Vec&) { return 0.7; }, 0.7, "const"};
  CHECK(weak_occupation_error(a, c, b).value <= 4.0 * std::numeric_limits<double>::epsilon());
  const BoundedFunction ind{[](const Vec& x) { return x(0) >= 0.0 ? 1.0 : 0.0; }, 1.0, "1[0,inf)"};
  CHECK(weak_occupation_error(a, ind, a).value == 0.0);
  const BoundedFunction unbounded{[](const Vec& x) { return x(0); }, 0.0, "x"};
  CHECK_THROWS_AS(weak_occupation_error(a, unbounded, b), Unsupported);
}

TEST_CASE("sup moment") {
  const TimeGrid g = make_grid(1.0, 3);
  const StreamKey c(56);
  CHECK(sup_moment(make_path_ensemble(g, {column({2, 2, 2, 2})}, c), 3.0).value == doctest::Approx(8.0));
  CHECK(sup_moment(make_path_ensemble(g, {column({0, 0, 0, 0})}, c), 3.0).value == 0.0);
  CHECK(sup_moment(make_path_ensemble(g, {column({1, -3, 2, 0}), column({0, 1, 0, 0})}, c), 2.0).value ==
        doctest::Approx(5.0));
  CHECK_THROWS_AS(sup_moment(make_path_ensemble(g, {column({0, 0, 0, 0})}, c), 1.5), InvalidArgument);
}

TEST_CASE("holder ratio") {
  const TimeGrid g = make_grid(1.0, 4);
  CHECK(holder_ratio(make_path_ensemble(g, {column({3, 3, 3, 3, 3})}, StreamKey(1)), 2.0) == 0.0);

  // pure Brownian paths, beta = 2: E|W_t - W_s|^2 / |t - s| = 1 for every pair
  const TimeGrid bg = make_grid(1.0, 8);
  std::vector<Trajectory> paths;
  for (int r = 0; r < 40000; ++r) paths.push_back(sample_brownian(bg, 1, StreamKey(57).with("path", r)).cumulative());
  const double ratio = holder_ratio(make_path_ensemble(bg, std::move(paths), StreamKey(57)), 2.0);
  CHECK(std::abs(ratio - 1.0) <= 0.05);
}

TEST_CASE("kernel average deviation") {
  const TimeGrid g = make_grid(1.0, 8);
  const auto law = uniform_law(0.0, 2.0);

  // kernel independent of y: the summand vanishes
  InteractionKernel flat = mean_kernel(1, 0.0);
  {
    const IidEnsemble rep = simulate_mckean(flat, law, 16, 64, g, StreamKey(58));
    CHECK(kernel_average_deviation_sample(rep, flat, 8, 16) == 0.0);
  }

  // N = 1, mean kernel: E|m - X^1_t|^2 = Var(X_t)
  const InteractionKernel k = mean_kernel(1);
  const auto pool = simulate_law_pool(k, law, 4096, g, StreamKey(59));
  std::vector<IidEnsemble> reps;
  for (int r = 0; r < 2000; ++r) reps.push_back(simulate_mckean(k, law, 1, pool, StreamKey(59).with("rep", r)));
  const ErrorEstimate e = kernel_average_deviation(reps, k, 8, 1);
  const Trajectory& last = pool->nodes.back();
  const double var = (last.col(0).array() - last.col(0).mean()).square().sum() / (last.rows() - 1);
  CHECK(std::abs(e.value - var) <= 3.0 * e.std_error + 0.05 * var);

  InteractionKernel no_closed = discontinuous_kernel(1);
  CHECK_THROWS_AS(kernel_average_deviation_sample(reps[0], no_closed, 8, 1), Unsupported);
  CHECK_THROWS_AS(kernel_average_deviation_sample(reps[0], k, 8, 2), InvalidArgument);
}

TEST_CASE("chaos error on coupled ensembles") {
  const TimeGrid g = make_grid(1.0, 8);
  const auto law = uniform_law(0.0, 2.0);
  const InteractionKernel zero = mean_kernel(1, 0.0);
  std::vector<ParticleEnsemble> ps;
  std::vector<IidEnsemble> iid;
  for (int r = 0; r < 5; ++r) {
    const StreamKey m = StreamKey(60).with("rep", r);
    ps.push_back(simulate_particle_system(zero, law, 4, g, m));
    iid.push_back(simulate_mckean(zero, law, 4, 16, g, m));
  }
  const ErrorEstimate e = strong_error(std::span<const ParticleEnsemble>(ps), std::span<const IidEnsemble>(iid));
  CHECK(e.value == 0.0);
  CHECK(e.particles == 4);

  iid[0] = simulate_mckean(zero, law, 4, 16, g, StreamKey(61));
  CHECK_THROWS_AS(chaos_sup_samples(ps[0], iid[0]), InvalidArgument);

  // max over j of per-particle means
  const ErrorEstimate w = worst_particle_error({{1.0, 3.0}, {4.0, 4.0}, {0.0, 2.0}});
  CHECK(w.value == 4.0);
  CHECK(w.replications == 2);
}

TEST_CASE("fit_rate") {
  const std::vector<std::pair<double, double>> sqrt_law{{1.0, 1.0}, {0.5, std::sqrt(0.5)}, {0.25, 0.5}};
  const RateFit a = fit_rate(sqrt_law);
  CHECK(a.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(a.r_squared - 1.0) <= 1e-12);
  CHECK(a.slope_std_error <= 1e-7);

  const RateFit flat = fit_rate(std::vector<std::pair<double, double>>{{1, 3}, {2, 3}, {4, 3}});
  CHECK(flat.slope == doctest::Approx(0.0));

  // residuals are orthogonal to the regressors
  const std::vector<std::pair<double, double>> noisy{{1, 2.0}, {2, 1.1}, {4, 0.7}, {8, 0.2}, {16, 0.15}};
  const RateFit f = fit_rate(noisy);
  double s0 = 0.0;
  double s1 = 0.0;
  for (const auto& [u, v] : f.points) {
    const double res = v - f.intercept - f.slope * u;
    s0 += res;
    s1 += res * u;
  }
  CHECK(std::abs(s0) <= 1e-10);
  CHECK(std::abs(s1) <= 1e-10);
  CHECK(f.r_squared >= 0.0);
  CHECK(f.r_squared <= 1.0);

  CHECK_THROWS_AS(fit_rate(std::vector<std::pair<double, double>>{{1, 1}, {2, 0}, {3, 1}}), InvalidArgument);
  CHECK_THROWS_AS(fit_rate(std::vector<std::pair<double, double>>{{1, 1}, {2, 1}}), InvalidArgument);
}

TEST_CASE("slope standard error propagation") {
  // slope = sum c_i y_i with c_i = (u_i - mean) / Suu
  const std::vector<double> u{0.0, 1.0, 2.0};
  const std::vector<double> s{0.1, 0.1, 0.1};
  CHECK(slope_std_error(u, s) == doctest::Approx(std::sqrt(2.0 * 0.01 / 4.0)));
}
