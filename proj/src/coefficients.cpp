#include "mfsde/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace mfsde {

void CoefficientBounds::validate() const {
  if (!(kappa0 > 0 && kappa1 > 0 && c0 > 0 && c1 > 0)) {
    throw InvalidArgument("coefficient bounds kappa0, kappa1, c0, c1 must be positive");
  }
  if (!(beta >= 1.0)) throw InvalidArgument("moment order beta must be >= 1");
}

// ---------------------------------------------------------------------------
// Averaging

Vec average_drift(const InteractionKernel& kernel, double t, const Vec& x, const Trajectory& atoms) {
  const Eigen::Index n = atoms.rows();
  if (n == 0) throw InvalidArgument("cannot average a kernel over an empty measure");
  if (kernel.drift_ignores_y) return kernel.drift(t, x, row_point(atoms, 0));
  Vec acc = kernel.drift(t, x, row_point(atoms, 0));
  for (Eigen::Index i = 1; i < n; ++i) acc += kernel.drift(t, x, row_point(atoms, i));
  return acc / static_cast<double>(n);
}

Mat average_diffusion(const InteractionKernel& kernel, double t, const Vec& x,
                      const Trajectory& atoms) {
  const Eigen::Index n = atoms.rows();
  if (n == 0) throw InvalidArgument("cannot average a kernel over an empty measure");
  if (kernel.diffusion_ignores_y) return kernel.diffusion(t, x, row_point(atoms, 0));
  Mat acc = kernel.diffusion(t, x, row_point(atoms, 0));
  for (Eigen::Index i = 1; i < n; ++i) acc += kernel.diffusion(t, x, row_point(atoms, i));
  return acc / static_cast<double>(n);
}

Vec average_drift(const InteractionKernel& kernel, double t, const Vec& x, const EmpiricalMeasure& mu) {
  if (mu.uniform()) return average_drift(kernel, t, x, mu.atoms());
  if (kernel.drift_ignores_y) return kernel.drift(t, x, mu.atom(0));
  Vec acc = mu.weight(0) * kernel.drift(t, x, mu.atom(0));
  for (Eigen::Index i = 1; i < mu.size(); ++i) acc += mu.weight(i) * kernel.drift(t, x, mu.atom(i));
  return acc;
}

Mat average_diffusion(const InteractionKernel& kernel, double t, const Vec& x,
                      const EmpiricalMeasure& mu) {
  if (mu.uniform()) return average_diffusion(kernel, t, x, mu.atoms());
  if (kernel.diffusion_ignores_y) return kernel.diffusion(t, x, mu.atom(0));
  Mat acc = mu.weight(0) * kernel.diffusion(t, x, mu.atom(0));
  for (Eigen::Index i = 1; i < mu.size(); ++i) {
    acc += mu.weight(i) * kernel.diffusion(t, x, mu.atom(i));
  }
  return acc;
}

MeasureCoefficient kernel_to_measure_coefficient(InteractionKernel kernel) {
  auto shared = std::make_shared<const InteractionKernel>(std::move(kernel));
  MeasureCoefficient out;
  out.drift = [shared](double t, const Vec& x, const EmpiricalMeasure& mu) {
    return average_drift(*shared, t, x, mu);
  };
  out.diffusion = [shared](double t, const Vec& x, const EmpiricalMeasure& mu) {
    return average_diffusion(*shared, t, x, mu);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Mollifier

double bump(double radius) {
  if (radius >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - radius * radius));
}

MollifierQuadrature mollifier_quadrature(const Mollifier& moll, int dim) {
  if (!(moll.epsilon > 0.0)) throw InvalidArgument("mollifier radius must be positive");
  if (moll.node_count < 1) throw InvalidArgument("mollifier needs at least one node per axis");
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("unsupported mollifier dimension");

  const int m = moll.node_count;
  const double spacing = 2.0 * moll.epsilon / m;
  MollifierQuadrature q;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Vec u(dim);
    for (int c = 0; c < dim; ++c) u(c) = -moll.epsilon + (idx[c] + 0.5) * spacing;
    const double w = bump(u.norm() / moll.epsilon);
    if (w > 0.0) {
      q.nodes.push_back(u);
      q.weights.push_back(w);
    }
    int c = dim - 1;
    while (c >= 0 && ++idx[c] == m) idx[c--] = 0;
    if (c < 0) break;
  }
  double total = 0.0;
  for (double w : q.weights) total += w;
  for (double& w : q.weights) w /= total;
  return q;
}

InteractionKernel mollify(const InteractionKernel& kernel, const Mollifier& moll) {
  auto quad = std::make_shared<const MollifierQuadrature>(mollifier_quadrature(moll, kernel.dim));
  auto base = std::make_shared<const InteractionKernel>(kernel);
  InteractionKernel out = kernel;
  out.drift_ignores_x = out.drift_ignores_y = false;
  out.diffusion_ignores_x = out.diffusion_ignores_y = false;
  out.closed_form_drift = nullptr;
  out.drift = [quad, base](double t, const Vec& x, const Vec& y) {
    Vec acc = Vec::Zero(x.size());
    for (std::size_t a = 0; a < quad->nodes.size(); ++a) {
      const Vec xs = x - quad->nodes[a];
      for (std::size_t b = 0; b < quad->nodes.size(); ++b) {
        acc += (quad->weights[a] * quad->weights[b]) * base->drift(t, xs, y - quad->nodes[b]);
      }
    }
    return acc;
  };
  out.diffusion = [quad, base](double t, const Vec& x, const Vec& y) {
    Mat acc = Mat::Zero(x.size(), x.size());
    for (std::size_t a = 0; a < quad->nodes.size(); ++a) {
      const Vec xs = x - quad->nodes[a];
      for (std::size_t b = 0; b < quad->nodes.size(); ++b) {
        acc += (quad->weights[a] * quad->weights[b]) * base->diffusion(t, xs, y - quad->nodes[b]);
      }
    }
    return acc;
  };
  return out;
}

DriftField mollify(const DriftField& field, const Mollifier& moll, int dim) {
  auto quad = std::make_shared<const MollifierQuadrature>(mollifier_quadrature(moll, dim));
  DriftField out = field;
  out.eval = [quad, base = field.eval](double t, const Vec& x) {
    Vec acc = Vec::Zero(x.size());
    for (std::size_t a = 0; a < quad->nodes.size(); ++a) {
      acc += quad->weights[a] * base(t, x - quad->nodes[a]);
    }
    return acc;
  };
  return out;
}

// ---------------------------------------------------------------------------
// Cutoff

double cutoff_weight(double radius, double r) {
  if (r <= radius) return 1.0;
  if (r >= radius + 1.0) return 0.0;
  // smoothstep(1 - s), which equals 1 - smoothstep(s) and cannot go negative
  const double u = radius + 1.0 - r;
  return std::clamp(u * u * u * (10.0 - 15.0 * u + 6.0 * u * u), 0.0, 1.0);
}

DriftField cutoff(const DriftField& field, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("cutoff radius must be positive");
  DriftField out = field;
  out.eval = [radius, base = field.eval](double t, const Vec& x) -> Vec {
    const double chi = cutoff_weight(radius, x.norm());
    if (chi == 1.0) return base(t, x);
    if (chi == 0.0) return Vec::Zero(x.size());
    return chi * base(t, x);
  };
  return out;
}

DiffusionField cutoff(const DiffusionField& field, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("cutoff radius must be positive");
  DiffusionField out = field;
  out.eval = [radius, base = field.eval](double t, const Vec& x) -> Mat {
    const double chi = cutoff_weight(radius, x.norm());
    if (chi == 1.0) return base(t, x);
    return base(t, Vec(chi * x));
  };
  return out;
}

double gaussian_density(double t, const Vec& y) {
  if (!(t > 0.0)) throw InvalidArgument("gaussian density needs t > 0");
  const double d = static_cast<double>(y.size());
  return std::pow(2.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-y.squaredNorm() / (2.0 * t));
}

// ---------------------------------------------------------------------------
// Audits

namespace {

Vec probe_point(const CounterRng& rng, std::uint64_t probe, int dim, double radius) {
  Vec x(dim);
  for (int c = 0; c < dim; ++c) {
    x(c) = radius * (2.0 * rng.uniform(probe * kMaxDim + static_cast<std::uint64_t>(c)) - 1.0);
  }
  return x;
}

}  // namespace

GrowthAudit audit_growth(const DriftField& b, const DiffusionField& sigma, int dim, int probes,
                         double radius, const StreamKey& key) {
  const CounterRng rng(key);
  GrowthAudit audit;
  for (int p = 0; p < probes; ++p) {
    const Vec x = probe_point(rng, static_cast<std::uint64_t>(p), dim, radius);
    const double t = rng.uniform(1'000'000'000ULL + static_cast<std::uint64_t>(p));
    const double lhs = b(t, x).norm() + operator_norm(sigma(t, x));
    audit.worst_ratio = std::max(audit.worst_ratio, lhs / (1.0 + x.norm()));
  }
  audit.passed = audit.worst_ratio <= b.bounds.c0 * (1.0 + 1e-12);
  return audit;
}

GrowthAudit audit_growth(const InteractionKernel& kernel, int probes, double radius,
                         const StreamKey& key) {
  const CounterRng rng(key);
  GrowthAudit audit;
  for (int p = 0; p < probes; ++p) {
    const auto base = static_cast<std::uint64_t>(2 * p);
    const Vec x = probe_point(rng, base, kernel.dim, radius);
    const Vec y = probe_point(rng, base + 1, kernel.dim, radius);
    const double t = rng.uniform(1'000'000'000ULL + static_cast<std::uint64_t>(p));
    const double lhs = kernel.drift(t, x, y).norm() + operator_norm(kernel.diffusion(t, x, y));
    audit.worst_ratio = std::max(audit.worst_ratio, lhs / (1.0 + x.norm() + y.norm()));
  }
  audit.passed = audit.worst_ratio <= kernel.bounds.c0 * (1.0 + 1e-12);
  return audit;
}

double audit_nondegeneracy(const DiffusionField& sigma, int dim, int probes, double radius,
                           const StreamKey& key) {
  const CounterRng rng(key);
  double worst = std::numeric_limits<double>::infinity();
  for (int p = 0; p < probes; ++p) {
    const Vec x = probe_point(rng, static_cast<std::uint64_t>(p), dim, radius);
    worst = std::min(worst, gram_determinant(sigma(0.0, x)));
  }
  return worst;
}

}  // namespace mfsde
