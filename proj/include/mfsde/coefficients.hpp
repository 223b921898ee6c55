#pragma once

#include "mfsde/core.hpp"
#include "mfsde/measure.hpp"
#include "mfsde/random.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mfsde {

/// Declared constants of a model: discretized-Ito bounds (kappa0, kappa1),
/// linear growth c0, nondegeneracy c1 and moment order beta.
struct CoefficientBounds {
  double kappa0 = 1.0;
  double kappa1 = 1.0;
  double c0 = 1.0;
  double c1 = 1.0;
  double beta = 2.0;

  /// Throws InvalidArgument unless all constants are positive and beta >= 1.
  void validate() const;
};

using DriftFn = std::function<Vec(double t, const Vec& x)>;
using DiffusionFn = std::function<Mat(double t, const Vec& x)>;
using KernelDriftFn = std::function<Vec(double t, const Vec& x, const Vec& y)>;
using KernelDiffusionFn = std::function<Mat(double t, const Vec& x, const Vec& y)>;
using MeasureDriftFn = std::function<Vec(double t, const Vec& x, const EmpiricalMeasure& mu)>;
using MeasureDiffusionFn = std::function<Mat(double t, const Vec& x, const EmpiricalMeasure& mu)>;

// Evaluators are opaque, pure and must be callable concurrently. Nothing
// about continuity is assumed.

struct DriftField {
  DriftFn eval;
  CoefficientBounds bounds;

  Vec operator()(double t, const Vec& x) const { return eval(t, x); }
};

struct DiffusionField {
  DiffusionFn eval;
  CoefficientBounds bounds;
  bool nondegenerate = true;

  Mat operator()(double t, const Vec& x) const { return eval(t, x); }
};

/**
 * Two-point interaction (b̄, σ̄). Averaging against a measure gives the
 * mean-field coefficients b(x, mu) = ∫ b̄(x, y) mu(dy).
 *
 * The `*_ignores_*` flags let the averaging skip work; they must be true
 * only when the evaluator genuinely does not read that argument.
 */
struct InteractionKernel {
  KernelDriftFn drift;
  KernelDiffusionFn diffusion;
  CoefficientBounds bounds;
  int dim = 1;
  bool drift_ignores_x = false;
  bool diffusion_ignores_x = false;
  bool drift_ignores_y = false;
  bool diffusion_ignores_y = false;
  /// Closed form of b(x, law) when known (e.g. the mean kernel); empty otherwise.
  MeasureDriftFn closed_form_drift;
};

struct MeasureCoefficient {
  MeasureDriftFn drift;
  MeasureDiffusionFn diffusion;
  /// Declared, never tested: mu -> drift(t, x, mu) is weakly continuous.
  bool assumes_weak_continuity = true;
};

/// sum_i w_i b̄(t, x, y_i); for uniform weights the plain sum divided by N.
Vec average_drift(const InteractionKernel& kernel, double t, const Vec& x, const EmpiricalMeasure& mu);
Mat average_diffusion(const InteractionKernel& kernel, double t, const Vec& x,
                      const EmpiricalMeasure& mu);

/// Uniform average over the rows of `atoms` without building a measure.
Vec average_drift(const InteractionKernel& kernel, double t, const Vec& x, const Trajectory& atoms);
Mat average_diffusion(const InteractionKernel& kernel, double t, const Vec& x,
                      const Trajectory& atoms);

MeasureCoefficient kernel_to_measure_coefficient(InteractionKernel kernel);

// ---------------------------------------------------------------------------
// Mollification and cutoff

struct Mollifier {
  double epsilon = 0.1;
  int node_count = 9;
};

/// Midpoint-rule nodes of the bump exp(-1/(1-|u/eps|^2)) on the eps-ball,
/// weights normalized to sum to one.
struct MollifierQuadrature {
  std::vector<Vec> nodes;
  std::vector<double> weights;
};

MollifierQuadrature mollifier_quadrature(const Mollifier& moll, int dim);

/// Unnormalized bump profile, zero outside the unit ball.
double bump(double radius);

/// Convolution of both kernel parts with rho_eps(u) rho_eps(v) in (x, y).
InteractionKernel mollify(const InteractionKernel& kernel, const Mollifier& moll);
DriftField mollify(const DriftField& field, const Mollifier& moll, int dim);

/// chi_R(|x|): 1 on [0, R], 0 beyond R+1, quintic smoothstep in between.
double cutoff_weight(double radius, double r);

/// x -> chi_R(x) b(t, x).
DriftField cutoff(const DriftField& field, double radius);

/// x -> sigma(t, chi_R(x) x); keeps nondegeneracy while freezing growth.
DiffusionField cutoff(const DiffusionField& field, double radius);

/// Heat kernel (2 pi t)^{-d/2} exp(-|y|^2 / (2t)) with d = y.size().
double gaussian_density(double t, const Vec& y);

// ---------------------------------------------------------------------------
// Sampling audits

struct GrowthAudit {
  double worst_ratio = 0.0;  ///< max of (|b| + ||sigma||) / (1 + |x| [+ |y|])
  bool passed = false;
};

GrowthAudit audit_growth(const DriftField& b, const DiffusionField& sigma, int dim, int probes,
                         double radius, const StreamKey& key);
GrowthAudit audit_growth(const InteractionKernel& kernel, int probes, double radius,
                         const StreamKey& key);

/// min det(sigma sigma^T) over random probes.
double audit_nondegeneracy(const DiffusionField& sigma, int dim, int probes, double radius,
                           const StreamKey& key);

}  // namespace mfsde
