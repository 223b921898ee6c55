#include "mfsde/catalog.hpp"

#include <algorithm>
#include <cmath>

namespace mfsde {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double positive_or_one(double v) { return v > 0.0 ? v : 1.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Fields

SdeModel constant_model(const Vec& b0, const Mat& sigma0) {
  const int d = static_cast<int>(b0.size());
  if (sigma0.rows() != d || sigma0.cols() != d) throw InvalidArgument("constant model: shape mismatch");
  CoefficientBounds bounds;
  bounds.c0 = positive_or_one(b0.norm() + operator_norm(sigma0));
  bounds.c1 = positive_or_one(gram_determinant(sigma0));
  SdeModel m;
  m.name = "constant";
  m.dim = d;
  m.drift = {[b0](double, const Vec&) { return b0; }, bounds};
  m.diffusion = {[sigma0](double, const Vec&) { return sigma0; }, bounds, gram_determinant(sigma0) > 0.0};
  return m;
}

SdeModel ou_model(double theta, double sigma0, int dim) {
  CoefficientBounds bounds;
  bounds.c0 = positive_or_one(std::max(std::abs(theta), std::abs(sigma0)));
  bounds.c1 = positive_or_one(std::pow(sigma0 * sigma0, dim));
  SdeModel m;
  m.name = "ou";
  m.dim = dim;
  m.drift = {[theta](double, const Vec& x) -> Vec { return -theta * x; }, bounds};
  const Mat s = sigma0 * Mat::Identity(dim, dim);
  m.diffusion = {[s](double, const Vec&) { return s; }, bounds, sigma0 != 0.0};
  return m;
}

SdeModel sign_drift_model(double a, double jump) {
  if (jump < 0.0) throw InvalidArgument("sign drift model: jump must be >= 0");
  CoefficientBounds bounds;
  bounds.c0 = std::abs(a) + 1.0 + jump;
  bounds.c1 = 1.0;
  SdeModel m;
  m.name = "sign_drift";
  m.dim = 1;
  m.drift = {[a](double, const Vec& x) -> Vec { return Vec::Constant(1, -a * sign(x(0))); }, bounds};
  m.diffusion = {[jump](double, const Vec& x) -> Mat { return Mat::Constant(1, 1, x(0) > 0.0 ? 1.0 + jump : 1.0); },
                 bounds, true};
  return m;
}

// ---------------------------------------------------------------------------
// Kernels

InteractionKernel mean_kernel(int dim, double strength) {
  InteractionKernel k;
  k.dim = dim;
  k.bounds.c0 = std::max(std::abs(strength), 1.0);
  k.bounds.c1 = 1.0;
  k.bounds.beta = 4.0;
  k.drift = [strength](double, const Vec&, const Vec& y) -> Vec { return strength * y; };
  const Mat id = Mat::Identity(dim, dim);
  k.diffusion = [id](double, const Vec&, const Vec&) { return id; };
  k.drift_ignores_x = true;
  k.diffusion_ignores_x = true;
  k.diffusion_ignores_y = true;
  k.drift_ignores_y = strength == 0.0;
  k.closed_form_drift = [strength](double, const Vec&, const EmpiricalMeasure& law) -> Vec {
    Vec acc = law.atom(0);
    for (Eigen::Index i = 1; i < law.size(); ++i) acc += law.atom(i);
    return strength * (acc / static_cast<double>(law.size()));
  };
  return k;
}

InteractionKernel discontinuous_kernel(int dim) {
  InteractionKernel k;
  k.dim = dim;
  k.bounds.c0 = std::sqrt(static_cast<double>(dim)) + 1.5;
  k.bounds.c1 = 1.0;
  k.bounds.beta = 4.0;
  k.drift = [](double, const Vec& x, const Vec& y) -> Vec {
    Vec out(x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) out(c) = sign(x(c) - y(c));
    return out;
  };
  k.diffusion = [](double, const Vec& x, const Vec& y) -> Mat {
    const double scale = y.norm() < 1.0 ? 1.5 : 1.0;
    return scale * Mat::Identity(x.size(), x.size());
  };
  return k;
}

// ---------------------------------------------------------------------------
// Adapted rules

AdaptedCoefficientRule brownian_rule(int dim) {
  const Mat id = Mat::Identity(dim, dim);
  return {[dim, id](int, const Trajectory&, const CounterRng&) { return ItoCoefficients{Vec::Zero(dim), id}; },
          1.0, 1.0, "brownian_rule"};
}

AdaptedCoefficientRule constant_drift_rule(const Vec& b0) {
  const int dim = static_cast<int>(b0.size());
  const Mat id = Mat::Identity(dim, dim);
  return {[b0, id](int, const Trajectory&, const CounterRng&) { return ItoCoefficients{b0, id}; },
          std::max(1.0, b0.norm()), 1.0, "constant_drift_rule"};
}

AdaptedCoefficientRule sin_switch_rule(int dim) {
  return {[dim](int j, const Trajectory& history, const CounterRng&) {
            const double lead = history(j, 0);
            ItoCoefficients c{Vec::Zero(dim), Mat::Identity(dim, dim)};
            c.drift(0) = std::clamp(std::sin(lead), -1.0, 1.0);
            if (lead > 0.0) c.diffusion *= 1.5;
            return c;
          },
          1.5, 1.0, "sin_switch_rule"};
}

AdaptedCoefficientRule random_scale_rule(int dim) {
  return {[dim](int, const Trajectory&, const CounterRng& aux) {
            ItoCoefficients c{Vec::Zero(dim), Mat::Identity(dim, dim)};
            c.drift(0) = aux.uniform(1) - 0.5;
            c.diffusion *= 1.0 + 0.5 * aux.uniform(0);
            return c;
          },
          1.5, 1.0, "random_scale_rule"};
}

// ---------------------------------------------------------------------------
// Initial laws

InitialLaw dirac_law(const Vec& x0) {
  InitialLaw law;
  law.dim = static_cast<int>(x0.size());
  law.name = "dirac";
  law.params.assign(x0.data(), x0.data() + x0.size());
  law.sample = [x0](const StreamKey&) { return x0; };
  return law;
}

InitialLaw uniform_law(double lo, double hi, int dim) {
  if (!(hi > lo)) throw InvalidArgument("uniform law needs lo < hi");
  InitialLaw law;
  law.dim = dim;
  law.name = "uniform";
  law.params = {lo, hi};
  law.has_lq_loc_density = true;
  law.sample = [lo, hi, dim](const StreamKey& key) {
    const CounterRng rng(key);
    Vec x(dim);
    for (int c = 0; c < dim; ++c) x(c) = lo + (hi - lo) * rng.uniform(static_cast<std::uint64_t>(c));
    return x;
  };
  return law;
}

InitialLaw gaussian_law(double mean, double stddev, int dim) {
  if (!(stddev > 0.0)) throw InvalidArgument("gaussian law needs stddev > 0");
  InitialLaw law;
  law.dim = dim;
  law.name = "gaussian";
  law.params = {mean, stddev};
  law.has_lq_loc_density = true;
  law.sample = [mean, stddev, dim](const StreamKey& key) {
    const CounterRng rng(key);
    Vec x(dim);
    for (int c = 0; c < dim; ++c) x(c) = mean + stddev * rng.normal(static_cast<std::uint64_t>(c));
    return x;
  };
  return law;
}

// ---------------------------------------------------------------------------
// Registry

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"constant", CatalogKind::Field, {{"b0", 0.0}, {"sigma0", 1.0}}, "b = b0 (each coordinate), sigma = sigma0 I"},
      {"ou", CatalogKind::Field, {{"theta", 1.0}, {"sigma0", 1.0}}, "b(x) = -theta x, sigma = sigma0 I"},
      {"sign_drift", CatalogKind::Field, {{"a", 1.0}, {"jump", 0.0}}, "b(x) = -a sign(x), sigma = 1 + jump 1_{x>0}"},
      {"mean_kernel", CatalogKind::Kernel, {{"strength", 1.0}}, "b̄(x,y) = strength y, σ̄ = I"},
      {"discontinuous_kernel", CatalogKind::Kernel, {}, "b̄(x,y) = sign(x-y), σ̄ = (1 + ½ 1_{|y|<1}) I"},
      {"brownian_rule", CatalogKind::Rule, {}, "(b_j, sigma_j) = (0, I)"},
      {"constant_drift_rule", CatalogKind::Rule, {{"b0", 1.0}}, "(b_j, sigma_j) = (b0 e1, I)"},
      {"sin_switch_rule", CatalogKind::Rule, {}, "b_j = sin(xi_j) e1, sigma_j = (1 + ½ 1_{xi_j > 0}) I"},
      {"random_scale_rule", CatalogKind::Rule, {}, "sigma_j = (1 + ½ U_j) I from the auxiliary stream"},
      {"dirac", CatalogKind::Law, {{"x0", 0.0}}, "point mass at x0 (each coordinate)"},
      {"uniform", CatalogKind::Law, {{"lo", 0.0}, {"hi", 2.0}}, "uniform on [lo, hi]^d"},
      {"gaussian", CatalogKind::Law, {{"mean", 0.0}, {"stddev", 1.0}}, "independent normal coordinates"},
  };
  return entries;
}

const CatalogEntry* find_catalog_entry(std::string_view name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

namespace {

const char* kind_name(CatalogKind kind) {
  switch (kind) {
    case CatalogKind::Field: return "field model";
    case CatalogKind::Kernel: return "interaction kernel";
    case CatalogKind::Rule: return "adapted rule";
    case CatalogKind::Law: return "initial law";
  }
  return "?";
}

// Merges user values over defaults, rejecting names the entry does not declare.
ParamMap resolve(const std::string& name, CatalogKind kind, const ParamMap& given) {
  const CatalogEntry* e = find_catalog_entry(name);
  if (!e) throw InvalidArgument("unknown catalog entry '" + name + "'");
  if (e->kind != kind) {
    throw InvalidArgument("'" + name + "' is a " + kind_name(e->kind) + ", expected a " + kind_name(kind));
  }
  ParamMap out(e->defaults.begin(), e->defaults.end());
  for (const auto& [key, value] : given) {
    if (!out.contains(key)) throw InvalidArgument("'" + name + "' has no parameter '" + key + "'");
    out[key] = value;
  }
  return out;
}

}  // namespace

SdeModel make_field_model(const std::string& name, const ParamMap& params, int dim) {
  const ParamMap p = resolve(name, CatalogKind::Field, params);
  if (name == "constant") {
    return constant_model(Vec::Constant(dim, p.at("b0")), p.at("sigma0") * Mat::Identity(dim, dim));
  }
  if (name == "ou") return ou_model(p.at("theta"), p.at("sigma0"), dim);
  if (dim != 1) throw InvalidArgument("sign_drift is a scalar model");
  return sign_drift_model(p.at("a"), p.at("jump"));
}

InteractionKernel make_kernel(const std::string& name, const ParamMap& params, int dim) {
  const ParamMap p = resolve(name, CatalogKind::Kernel, params);
  if (name == "mean_kernel") return mean_kernel(dim, p.at("strength"));
  return discontinuous_kernel(dim);
}

AdaptedCoefficientRule make_rule(const std::string& name, const ParamMap& params, int dim) {
  const ParamMap p = resolve(name, CatalogKind::Rule, params);
  if (name == "brownian_rule") return brownian_rule(dim);
  if (name == "constant_drift_rule") {
    Vec b0 = Vec::Zero(dim);
    b0(0) = p.at("b0");
    return constant_drift_rule(b0);
  }
  if (name == "sin_switch_rule") return sin_switch_rule(dim);
  return random_scale_rule(dim);
}

InitialLaw make_law(const std::string& name, const ParamMap& params, int dim) {
  const ParamMap p = resolve(name, CatalogKind::Law, params);
  if (name == "dirac") return dirac_law(Vec::Constant(dim, p.at("x0")));
  if (name == "uniform") return uniform_law(p.at("lo"), p.at("hi"), dim);
  return gaussian_law(p.at("mean"), p.at("stddev"), dim);
}

}  // namespace mfsde
