#include "mfsde/krylov.hpp"

#include <cmath>
#include <numbers>

namespace mfsde {

double ball_volume(double r, int d) {
  const double half = 0.5 * d;
  return std::pow(std::numbers::pi, half) * std::pow(r, d) / std::tgamma(half + 1.0);
}

GridFunctionFamily ball_indicator_family(double r, int d, int N) {
  if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
  if (N < 1) throw InvalidArgument("family needs at least one member");
  const double vol = ball_volume(r, d);
  GridFunction f{[r2 = r * r](const Vec& x) { return x.squaredNorm() <= r2 ? 1.0 : 0.0; },
                 [vol](double p) { return std::pow(vol, 1.0 / p); }, "indicator(|x| <= r)"};
  return {std::vector<GridFunction>(static_cast<std::size_t>(N), f), d, true};
}

GridFunctionFamily constant_family(double c, int d, int N) {
  if (N < 1) throw InvalidArgument("family needs at least one member");
  GridFunction f{[c](const Vec&) { return c; }, nullptr, "constant"};
  if (c == 0.0) f.lp_norm = [](double) { return 0.0; };
  return {std::vector<GridFunction>(static_cast<std::size_t>(N), f), d, true};
}

GridFunctionFamily scaled(const GridFunctionFamily& family, double c) {
  if (!(c > 0.0)) throw InvalidArgument("scale factor must be positive");
  GridFunctionFamily out = family;
  for (auto& m : out.members) {
    m.eval = [c, f = m.eval](const Vec& x) { return c * f(x); };
    if (m.lp_norm) m.lp_norm = [c, g = m.lp_norm](double p) { return c * g(p); };
    m.formula = std::to_string(c) + " * " + m.formula;
  }
  return out;
}

GridFunctionFamily quadrature_family(std::function<double(const Vec&)> f, int d, int N, double lo,
                                     double hi, int resolution, std::string formula) {
  if (!(hi > lo) || resolution < 1) throw InvalidArgument("bad quadrature box");
  if (N < 1) throw InvalidArgument("family needs at least one member");
  auto norm = [f, d, lo, hi, resolution](double p) {
    const double dx = (hi - lo) / resolution;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    double acc = 0.0;
    while (true) {
      Vec x(d);
      for (int c = 0; c < d; ++c) x(c) = lo + (idx[c] + 0.5) * dx;
      acc += std::pow(std::abs(f(x)), p);
      int c = d - 1;
      while (c >= 0 && ++idx[c] == resolution) idx[c--] = 0;
      if (c < 0) break;
    }
    return std::pow(acc * std::pow(dx, d), 1.0 / p);
  };
  GridFunction member{std::move(f), norm, std::move(formula)};
  return {std::vector<GridFunction>(static_cast<std::size_t>(N), member), d, true};
}

std::vector<double> occupation_samples(std::span<const DiscretizedItoPath> paths,
                                       const GridFunctionFamily& family) {
  std::vector<double> out;
  out.reserve(paths.size());
  for (const auto& path : paths) {
    if (path.steps != family.size()) {
      throw InvalidArgument("family has " + std::to_string(family.size()) + " members but the path has " +
                            std::to_string(path.steps) + " steps");
    }
    double acc = 0.0;
    for (int k = 1; k <= path.steps; ++k) acc += family.members[static_cast<std::size_t>(k - 1)].eval(path.value(k));
    out.push_back(acc / path.steps);
  }
  return out;
}

Estimate occupation_average(std::span<const DiscretizedItoPath> paths, const GridFunctionFamily& family) {
  const auto samples = occupation_samples(paths, family);
  return mean_estimate(samples);
}

double lp_seq_norm(const GridFunctionFamily& family, double p) {
  if (!(p > 1.0)) throw InvalidArgument("lp_seq_norm needs p > 1");
  double acc = 0.0;
  for (const auto& m : family.members) {
    if (!m.lp_norm) throw Unsupported("family member '" + m.formula + "' has no L^p norm provider");
    acc += std::pow(m.lp_norm(p), p);
  }
  return std::pow(acc / family.size(), 1.0 / p);
}

KrylovRatio krylov_ratio(std::span<const double> occupation, const GridFunctionFamily& family, double p,
                         KrylovVariant variant) {
  double normalizer = 0.0;
  if (variant == KrylovVariant::TimeIndependent) {
    if (!family.time_independent) throw InvalidArgument("time-independent ratio needs a single test function");
    if (!family.members.front().lp_norm) throw Unsupported("test function has no L^p norm provider");
    normalizer = family.members.front().lp_norm(p);
  } else {
    normalizer = lp_seq_norm(family, p);
  }
  if (!(normalizer > 0.0)) throw DegenerateFamily("L^p normalizer is zero; the ratio is undefined");
  const Estimate occ = mean_estimate(occupation);
  KrylovRatio r;
  r.occupation = occ.value;
  r.normalizer = normalizer;
  r.ratio = occ.value / normalizer;
  r.std_error = occ.std_error / normalizer;
  r.ci_low = r.ratio - 1.96 * r.std_error;
  r.ci_high = r.ratio + 1.96 * r.std_error;
  return r;
}

KrylovRatio krylov_ratio(std::span<const DiscretizedItoPath> paths, const GridFunctionFamily& family, double p,
                         KrylovVariant variant) {
  const auto samples = occupation_samples(paths, family);
  return krylov_ratio(samples, family, p, variant);
}

}  // namespace mfsde
