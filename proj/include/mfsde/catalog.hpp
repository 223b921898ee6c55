#pragma once

#include "mfsde/coefficients.hpp"
#include "mfsde/euler.hpp"
#include "mfsde/particles.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mfsde {

/// Classical SDE model dX = b(t, X) dt + sigma(t, X) dW.
struct SdeModel {
  std::string name;
  DriftField drift;
  DiffusionField diffusion;
  int dim = 1;
};

// Named constructors -------------------------------------------------------

SdeModel constant_model(const Vec& b0, const Mat& sigma0);
/// b(x) = -theta x, sigma = sigma0 I.
SdeModel ou_model(double theta, double sigma0, int dim = 1);
/// b(x) = -a sign(x), sigma(x) = 1 + jump 1_{x > 0}. Scalar model.
SdeModel sign_drift_model(double a, double jump = 0.0);

/// b̄(x, y) = strength y, σ̄ = I; mean-field drift is strength times the mean.
InteractionKernel mean_kernel(int dim = 1, double strength = 1.0);
/// b̄(x, y) = sign(x - y) componentwise, σ̄(x, y) = (1 + ½ 1_{|y| < 1}) I.
InteractionKernel discontinuous_kernel(int dim = 1);

AdaptedCoefficientRule brownian_rule(int dim = 1);
AdaptedCoefficientRule constant_drift_rule(const Vec& b0);
/// b_j = clamp(sin(xi_j . e1), ±1) e1, sigma_j = (1 + ½ 1_{xi_j . e1 > 0}) I; kappa0 = 1.5, kappa1 = 1.
AdaptedCoefficientRule sin_switch_rule(int dim = 1);
/// b_j = (U'_j - ½) e1, sigma_j = (1 + ½ U_j) I with U, U' from the step's auxiliary stream.
AdaptedCoefficientRule random_scale_rule(int dim = 1);

InitialLaw dirac_law(const Vec& x0);
/// Uniform on [lo, hi]^dim (has a bounded density).
InitialLaw uniform_law(double lo, double hi, int dim = 1);
InitialLaw gaussian_law(double mean, double stddev, int dim = 1);

// Name-based lookup for configuration files --------------------------------

enum class CatalogKind { Field, Kernel, Rule, Law };

struct CatalogEntry {
  std::string name;
  CatalogKind kind;
  std::vector<std::pair<std::string, double>> defaults;
  std::string summary;
};

using ParamMap = std::map<std::string, double>;

const std::vector<CatalogEntry>& catalog();
/// nullptr when the name is unknown.
const CatalogEntry* find_catalog_entry(std::string_view name);

/// Each throws InvalidArgument for unknown names, wrong kinds or unknown parameters.
SdeModel make_field_model(const std::string& name, const ParamMap& params, int dim);
InteractionKernel make_kernel(const std::string& name, const ParamMap& params, int dim);
AdaptedCoefficientRule make_rule(const std::string& name, const ParamMap& params, int dim);
InitialLaw make_law(const std::string& name, const ParamMap& params, int dim);

}  // namespace mfsde
