#pragma once

#include "mfsde/core.hpp"
#include "mfsde/euler.hpp"
#include "mfsde/stats.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mfsde {

/// One test function f_k >= 0 with an optional L^p norm provider.
struct GridFunction {
  std::function<double(const Vec&)> eval;
  /// p -> ||f||_{L^p(R^d)}; empty when no norm is known.
  std::function<double(double)> lp_norm;
  std::string formula;
};

/// f_1..f_N evaluated along xi^N_1..xi^N_N.
struct GridFunctionFamily {
  std::vector<GridFunction> members;
  int dim = 1;
  /// All members are the same function (enables the ||f||_{L^p} normalizer).
  bool time_independent = false;

  int size() const noexcept { return static_cast<int>(members.size()); }
};

/// Volume of the Euclidean ball of radius r in R^d.
double ball_volume(double r, int d);

/// f_k = 1_{B_r} for every k, with ||f_k||_p = vol(B_r)^{1/p}.
GridFunctionFamily ball_indicator_family(double r, int d, int N);

/// f_k = c for every k. No norm provider (constants are not in L^p).
GridFunctionFamily constant_family(double c, int d, int N);

/// c f_k with norms scaled by c.
GridFunctionFamily scaled(const GridFunctionFamily& family, double c);

/// A time-independent family whose norm comes from a midpoint rule on [lo, hi]^d.
GridFunctionFamily quadrature_family(std::function<double(const Vec&)> f, int d, int N, double lo,
                                     double hi, int resolution, std::string formula);

/// Per-replication values (1/N) sum_{k=1..N} f_k(xi^N_k).
std::vector<double> occupation_samples(std::span<const DiscretizedItoPath> paths,
                                       const GridFunctionFamily& family);

/// Monte Carlo mean of the occupation functional with jackknife standard error.
Estimate occupation_average(std::span<const DiscretizedItoPath> paths, const GridFunctionFamily& family);

/// ((1/N) sum_k ||f_k||_p^p)^{1/p}. Throws Unsupported when a member lacks a norm.
double lp_seq_norm(const GridFunctionFamily& family, double p);

enum class KrylovVariant {
  Sequence,         ///< normalizer ((1/N) sum ||f_k||_p^p)^{1/p}
  TimeIndependent,  ///< normalizer ||f||_p for a single f
};

struct KrylovRatio {
  double ratio = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;   ///< ratio - 1.96 stderr
  double ci_high = 0.0;  ///< ratio + 1.96 stderr
  double occupation = 0.0;
  double normalizer = 0.0;
};

/// occupation_average / normalizer. Throws DegenerateFamily when the normalizer is zero.
KrylovRatio krylov_ratio(std::span<const DiscretizedItoPath> paths, const GridFunctionFamily& family,
                         double p, KrylovVariant variant = KrylovVariant::Sequence);

/// Same, from precomputed occupation samples.
KrylovRatio krylov_ratio(std::span<const double> occupation, const GridFunctionFamily& family, double p,
                         KrylovVariant variant = KrylovVariant::Sequence);

}  // namespace mfsde
