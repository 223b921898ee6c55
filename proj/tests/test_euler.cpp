#include "mfsde/catalog.hpp"
#include "mfsde/diagnostics.hpp"
#include "mfsde/euler.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace mfsde;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

DriftField const_drift(double b) {
  return {[b](double, const Vec& x) { return Vec(Vec::Constant(x.size(), b)); }, {}};
}

DiffusionField const_diffusion(double s) {
  return {[s](double, const Vec& x) { return Mat(Mat::Identity(x.size(), x.size()) * s); }, {}};
}

}  // namespace

TEST_CASE("euler_step examples") {
  CHECK(euler_step(const_drift(0), const_diffusion(1), 0.0, v1(0), 0.1, v1(0.7))(0) == 0.7);
  const SdeModel ou = ou_model(1.0, 1.0);
  CHECK(euler_step(ou.drift, ou.diffusion, 0.0, v1(1), 0.5, v1(0))(0) == 0.5);
  CHECK(euler_step(const_drift(1), const_diffusion(0), 0.0, v1(0), 0.25, v1(0.3))(0) == 0.25);
  CHECK_THROWS_AS(euler_step(const_drift(1), const_diffusion(0), 0.0, v1(0), 0.0, v1(0)), InvalidArgument);
}

TEST_CASE("numeric failure carries the step coordinates") {
  DriftField blowup{[](double t, const Vec& x) { return Vec(t > 0.4 ? Vec::Constant(1, NAN) : Vec(x)); }, {}};
  const TimeGrid g = make_grid(1.0, 10);
  const BrownianPath bm = sample_brownian(g, 1, StreamKey(1));
  try {
    simulate_euler(blowup, const_diffusion(1), v1(1), g, bm);
    FAIL("expected a numeric failure");
  } catch (const NumericFailure& e) {
    CHECK(e.step() == 5);
    CHECK(e.time() == doctest::Approx(0.5));
    CHECK(e.state().size() == 1);
  }
}

TEST_CASE("simulate_euler examples") {
  const TimeGrid g = make_grid(1.0, 32);
  const BrownianPath bm = sample_brownian(g, 2, StreamKey(11));
  const EulerPath walk = simulate_euler(const_drift(0), const_diffusion(1), Vec::Zero(2), g, bm);
  for (int k = 0; k <= 32; ++k) CHECK(walk.state(k) == bm.cumulative(k));

  Vec x0(2);
  x0 << 1.5, -2.0;
  const EulerPath still = simulate_euler(const_drift(0), const_diffusion(0), x0, g, bm);
  for (int k = 0; k <= 32; ++k) CHECK(still.state(k) == x0);

  CHECK_THROWS_AS(simulate_euler(const_drift(0), const_diffusion(1), v1(0), g, bm), InvalidArgument);
  CHECK_THROWS_AS(simulate_euler(const_drift(0), const_diffusion(1), Vec::Zero(2), make_grid(1.0, 16), bm),
                  InvalidArgument);
}

TEST_CASE("affine exactness to 1e-12 relative") {
  const double b0 = 0.7;
  const double s0 = 1.3;
  const TimeGrid g = make_grid(2.0, 64);
  double worst = 0.0;
  for (int r = 0; r < 100; ++r) {
    const BrownianPath bm = sample_brownian(g, 1, StreamKey(12).with("path", r));
    const EulerPath p = simulate_euler(const_drift(b0), const_diffusion(s0), v1(0.4), g, bm);
    for (int k = 0; k <= g.steps(); ++k) {
      const double exact = 0.4 + b0 * g.node(k) + s0 * bm.cumulative(k)(0);
      worst = std::max(worst, std::abs(p.state(k)(0) - exact) / std::max(1.0, std::abs(exact)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("replaying the recursion reproduces every state") {
  const SdeModel m = sign_drift_model(1.0, 0.5);
  const TimeGrid g = make_grid(1.0, 50);
  const BrownianPath bm = sample_brownian(g, 1, StreamKey(13));
  const EulerPath p = simulate_euler(m.drift, m.diffusion, v1(0.5), g, bm);
  for (int k = 0; k < 50; ++k) {
    CHECK(euler_step(m.drift, m.diffusion, g.node(k), p.state(k), g.step(), bm.increment(k)) == p.state(k + 1));
  }
  CHECK(simulate_euler(m.drift, m.diffusion, v1(0.5), g, bm).states == p.states);
}

TEST_CASE("interpolate") {
  const BrownianPath fine = sample_brownian(make_grid(1.0, 16), 1, StreamKey(14));
  const BrownianPath coarse = coarsen(fine, 4);
  const SdeModel ou = ou_model(1.0, 1.0);
  const EulerPath p = simulate_euler(ou.drift, ou.diffusion, v1(1.0), coarse.grid(), coarse);
  for (int k = 0; k <= 4; ++k) CHECK(interpolate(p, ou.drift, ou.diffusion, fine, 0.25 * k) == p.state(k));

  // between coarse nodes: the frozen-coefficient formula
  const double t = 0.375;
  const Vec xk = p.state(1);
  const double expected = xk(0) - xk(0) * (t - 0.25) + (fine.cumulative(6)(0) - fine.cumulative(4)(0));
  CHECK(interpolate(p, ou.drift, ou.diffusion, fine, t)(0) == doctest::Approx(expected).epsilon(1e-15));

  const EulerPath w = simulate_euler(const_drift(0), const_diffusion(1), v1(0), coarse.grid(), coarse);
  for (int m = 0; m <= 16; ++m) {
    CHECK(interpolate(w, const_drift(0), const_diffusion(1), fine, fine.grid().node(m))(0) ==
          doctest::Approx(fine.cumulative(m)(0)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(interpolate(p, ou.drift, ou.diffusion, fine, 0.3), InvalidArgument);
  CHECK_THROWS_AS(interpolate(p, ou.drift, ou.diffusion, coarse, 0.25), InvalidArgument);

  const EulerPath lifted = interpolate_onto(p, ou.drift, ou.diffusion, fine);
  CHECK(lifted.grid == fine.grid());
  for (int k = 0; k <= 4; ++k) CHECK(lifted.state(4 * k) == p.state(k));
}

TEST_CASE("exact OU limit cases") {
  const TimeGrid g = make_grid(1.0, 20);
  const BrownianPath bm = sample_brownian(g, 1, StreamKey(15));
  const EulerPath b = exact_ou(0.0, Mat::Identity(1, 1), v1(0), g, bm);
  for (int k = 0; k <= 20; ++k) CHECK(b.state(k)(0) == bm.cumulative(k)(0));

  const EulerPath decay = exact_ou(1.3, Mat::Zero(1, 1), v1(2.0), g, bm);
  for (int k = 0; k <= 20; ++k) {
    CHECK(decay.state(k)(0) == doctest::Approx(2.0 * std::exp(-1.3 * g.node(k))).epsilon(1e-13));
  }
}

TEST_CASE("exact OU has the stationary-free variance of the true solution") {
  // Var X_T = sigma^2 (1 - e^{-2 theta T}) / (2 theta) for x0 = 0
  const double theta = 1.0;
  const TimeGrid g = make_grid(1.0, 4);
  const int R = 40000;
  double ss = 0.0;
  for (int r = 0; r < R; ++r) {
    const BrownianPath bm = sample_brownian(g, 1, StreamKey(16).with("path", r));
    const double x = exact_ou(theta, Mat::Identity(1, 1), v1(0), g, bm).state(4)(0);
    ss += x * x;
  }
  const double var = ss / R;
  const double exact = (1.0 - std::exp(-2.0 * theta)) / (2.0 * theta);
  CHECK(std::abs(var - exact) <= 4.0 * exact * std::sqrt(2.0 / R));
}

TEST_CASE("Euler vs exact OU: sup error decays with slope about 1") {
  const SdeModel ou = ou_model(1.0, 1.0);
  const int finest = 512;
  const int R = 400;
  std::vector<std::pair<double, double>> points;
  for (int n : {16, 32, 64, 128, 256, 512}) {
    double acc = 0.0;
    for (int r = 0; r < R; ++r) {
      const BrownianPath fine = sample_brownian(make_grid(1.0, finest), 1, StreamKey(17).with("path", r));
      const BrownianPath bm = coarsen(fine, finest / n);
      const EulerPath e = simulate_euler(ou.drift, ou.diffusion, v1(1.0), bm.grid(), bm);
      const EulerPath x = exact_ou(1.0, Mat::Identity(1, 1), v1(1.0), bm.grid(), bm);
      acc += sup_square_difference(e.states, e.grid, x.states, x.grid);
    }
    points.emplace_back(1.0 / n, std::sqrt(acc / R));
  }
  const RateFit fit = fit_rate(points);
  CHECK(fit.slope > 0.85);
  CHECK(fit.slope < 1.15);
}

TEST_CASE("discretized Ito examples") {
  const int N = 64;
  const BrownianPath bm = sample_brownian(make_grid(1.0, N), 1, StreamKey(18));
  const StreamKey aux = StreamKey(18).with("aux-base", 0);

  const DiscretizedItoPath w = simulate_discretized_ito(brownian_rule(1), v1(0.5), bm, aux);
  for (int k = 0; k <= N; ++k) {
    CHECK(w.value(k)(0) == doctest::Approx(0.5 + bm.cumulative(k)(0)).epsilon(1e-14));
  }

  const DiscretizedItoPath c = simulate_discretized_ito(constant_drift_rule(v1(0.8)), v1(0.0), bm, aux);
  for (int k = 0; k <= N; ++k) {
    CHECK(c.value(k)(0) == doctest::Approx(0.8 * k / N + bm.cumulative(k)(0)).epsilon(1e-13));
  }

  const AdaptedCoefficientRule sw = sin_switch_rule(1);
  const DiscretizedItoPath s = simulate_discretized_ito(sw, v1(0.1), bm, aux);
  CHECK(find_bound_violation(s, 1.5, 1.0) == -1);
  for (int j = 0; j < N; ++j) {
    // recursion holds exactly
    CHECK(s.value(j + 1)(0) ==
          s.value(j)(0) + s.drift_trace(j, 0) / N + s.diffusion_trace[j](0, 0) * bm.increment(j)(0));
  }
  CHECK_THROWS_AS(simulate_discretized_ito(sw, v1(0.1), sample_brownian(make_grid(2.0, N), 1, StreamKey(1)), aux),
                  InvalidArgument);
}

TEST_CASE("bound violations abort the recursion") {
  AdaptedCoefficientRule loud{[](int j, const Trajectory&, const CounterRng&) {
                                return ItoCoefficients{v1(j >= 3 ? 5.0 : 0.0), Mat::Identity(1, 1)};
                              },
                              1.5, 1.0, "loud"};
  const BrownianPath bm = sample_brownian(make_grid(1.0, 8), 1, StreamKey(19));
  try {
    simulate_discretized_ito(loud, v1(0), bm, StreamKey(2));
    FAIL("expected a bound violation");
  } catch (const BoundViolation& e) {
    CHECK(e.step() == 3);
  }
  AdaptedCoefficientRule flat{[](int, const Trajectory&, const CounterRng&) {
                                return ItoCoefficients{v1(0.0), Mat::Identity(1, 1) * 0.5};
                              },
                              1.5, 1.0, "flat"};
  CHECK_THROWS_AS(simulate_discretized_ito(flat, v1(0), bm, StreamKey(2)), BoundViolation);
}

TEST_CASE("adaptedness: replay with truncated history gives the same trace") {
  const int N = 32;
  for (const AdaptedCoefficientRule& rule : {sin_switch_rule(1), random_scale_rule(1)}) {
    const BrownianPath bm = sample_brownian(make_grid(1.0, N), 1, StreamKey(20));
    const StreamKey aux = StreamKey(20).with("aux-base", 1);
    const DiscretizedItoPath p = simulate_discretized_ito(rule, v1(-0.3), bm, aux);
    CHECK(find_bound_violation(p, rule.kappa0, rule.kappa1) == -1);
    for (int j = 0; j < N; ++j) {
      const Trajectory history = p.values.topRows(j + 1);
      const ItoCoefficients c = rule.eval(j, history, CounterRng(aux_key(aux, j)));
      CHECK(c.drift == row_point(p.drift_trace, j));
      CHECK(c.diffusion == p.diffusion_trace[j]);
    }
    // altering the future leaves the past trace untouched
    BrownianPath other = sample_brownian(make_grid(1.0, N), 1, StreamKey(21));
    Trajectory inc = bm.increments();
    inc.bottomRows(N / 2) = other.increments().bottomRows(N / 2);
    const DiscretizedItoPath q = simulate_discretized_ito(rule, v1(-0.3), brownian_from_increments(bm.grid(), inc), aux);
    CHECK(q.drift_trace.topRows(N / 2 + 1) == p.drift_trace.topRows(N / 2 + 1));
  }
}
