#include "mfsde/catalog.hpp"
#include "mfsde/krylov.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mfsde;

namespace {

std::vector<DiscretizedItoPath> run_paths(const AdaptedCoefficientRule& rule, int N, int R, std::uint64_t seed) {
  std::vector<DiscretizedItoPath> out;
  const TimeGrid g = make_grid(1.0, N);
  for (int i = 0; i < R; ++i) {
    const StreamKey key = StreamKey(seed).with("krylov", i);
    out.push_back(simulate_discretized_ito(rule, Vec::Zero(1), sample_brownian(g, 1, key), key));
  }
  return out;
}

}  // namespace

TEST_CASE("ball indicator norms") {
  CHECK(ball_indicator_family(1.0, 1, 3).members[0].lp_norm(2.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(ball_indicator_family(1.0, 2, 3).members[0].lp_norm(1.0) == doctest::Approx(std::numbers::pi));
  CHECK(ball_indicator_family(0.5, 1, 3).members[0].lp_norm(2.0) == doctest::Approx(1.0));
  CHECK(ball_volume(1.0, 3) == doctest::Approx(4.0 / 3.0 * std::numbers::pi));
  const auto f = ball_indicator_family(1.0, 1, 2);
  CHECK(f.members[0].eval(Vec::Constant(1, 1.0)) == 1.0);
  CHECK(f.members[0].eval(Vec::Constant(1, 1.01)) == 0.0);
  CHECK_THROWS_AS(ball_indicator_family(0.0, 1, 2), InvalidArgument);
}

TEST_CASE("lp_seq_norm") {
  CHECK(lp_seq_norm(scaled(ball_indicator_family(0.5, 1, 4), 3.0), 2.0) == doctest::Approx(3.0));
  CHECK(lp_seq_norm(ball_indicator_family(1.0, 1, 4), 2.0) == doctest::Approx(std::sqrt(2.0)));
  GridFunctionFamily mixed = ball_indicator_family(0.5, 1, 2);
  mixed.members[0] = constant_family(0.0, 1, 1).members[0];
  mixed.time_independent = false;
  CHECK(lp_seq_norm(mixed, 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(lp_seq_norm(constant_family(1.0, 1, 3), 2.0), Unsupported);
  CHECK_THROWS_AS(lp_seq_norm(ball_indicator_family(1.0, 1, 2), 1.0), InvalidArgument);
}

TEST_CASE("quadrature family norm") {
  // f = 1 on [0, 1]^2 inside the box [-1, 2]^2: norm 1 for any p
  const auto fam = quadrature_family(
      [](const Vec& x) { return (x.array() >= 0.0).all() && (x.array() <= 1.0).all() ? 1.0 : 0.0; }, 2, 3, -1.0,
      2.0, 300, "unit square");
  CHECK(fam.members[0].lp_norm(3.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("occupation averages of trivial families are exact") {
  const auto paths = run_paths(sin_switch_rule(1), 8, 50, 40);
  const Estimate zero = occupation_average(paths, constant_family(0.0, 1, 8));
  CHECK(zero.value == 0.0);
  CHECK(zero.std_error == 0.0);
  const Estimate one = occupation_average(paths, constant_family(1.0, 1, 8));
  CHECK(one.value == 1.0);
  CHECK(one.std_error == 0.0);
  CHECK_THROWS_AS(occupation_average(paths, constant_family(1.0, 1, 9)), InvalidArgument);
}

TEST_CASE("occupation average excludes the initial value") {
  // xi_0 = 0 is inside the ball; with a huge drift every later value leaves it
  AdaptedCoefficientRule run_away{[](int, const Trajectory&, const CounterRng&) {
                                    return ItoCoefficients{Vec::Constant(1, 50.0), Mat::Identity(1, 1) * 1e-3};
                                  },
                                  50.0, 1e-7, "run_away"};
  const auto paths = run_paths(run_away, 4, 3, 41);
  CHECK(occupation_average(paths, ball_indicator_family(1.0, 1, 4)).value == 0.0);
}

TEST_CASE("pure Brownian occupation matches the Gaussian CDF oracle") {
  // (1/4) sum_k P(|W_{k/4}| <= 1) = (1/4) sum_k erf(1 / sqrt(2 k / 4))
  double oracle = 0.0;
  for (int k = 1; k <= 4; ++k) oracle += std::erf(1.0 / std::sqrt(2.0 * k / 4.0));
  oracle /= 4.0;
  CHECK(oracle == doctest::Approx(0.808).epsilon(1e-3));
  const auto paths = run_paths(brownian_rule(1), 4, 20000, 42);
  const Estimate e = occupation_average(paths, ball_indicator_family(1.0, 1, 4));
  CHECK(std::abs(e.value - oracle) <= 3.0 * e.std_error);
}

TEST_CASE("krylov ratio") {
  const auto paths = run_paths(sin_switch_rule(1), 16, 400, 43);
  CHECK_THROWS_AS(krylov_ratio(paths, constant_family(0.0, 1, 16), 3.0), DegenerateFamily);

  const auto fam = ball_indicator_family(0.5, 1, 16);
  const KrylovRatio r = krylov_ratio(paths, fam, 3.0);
  CHECK(r.ratio > 0.0);
  CHECK(std::isfinite(r.ratio));
  CHECK(r.ci_low == doctest::Approx(r.ratio - 1.96 * r.std_error));
  CHECK(r.ci_high == doctest::Approx(r.ratio + 1.96 * r.std_error));
  CHECK(r.normalizer == doctest::Approx(std::pow(1.0, 1.0 / 3.0)));

  // scaling equivariance on the same sample set
  const KrylovRatio s = krylov_ratio(paths, scaled(fam, 7.5), 3.0);
  CHECK(s.ratio == doctest::Approx(r.ratio).epsilon(1e-12));

  // time-independent variant uses ||f||_p directly
  const KrylovRatio ti = krylov_ratio(paths, fam, 3.0, KrylovVariant::TimeIndependent);
  CHECK(ti.ratio == doctest::Approx(r.ratio).epsilon(1e-12));
}

TEST_CASE("enlarging supports never lowers the occupation, sample by sample") {
  const auto paths = run_paths(sin_switch_rule(1), 32, 300, 44);
  std::vector<double> prev;
  for (double r : {0.125, 0.25, 0.5, 1.0}) {
    const auto cur = occupation_samples(paths, ball_indicator_family(r, 1, 32));
    if (!prev.empty()) {
      for (std::size_t i = 0; i < cur.size(); ++i) CHECK(cur[i] >= prev[i]);
    }
    prev = cur;
  }
}
