#pragma once

#include <functional>
#include <span>

namespace mfsde {

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  int replications = 0;
};

/// Index-ascending sum; the fixed order keeps results independent of threading.
double ordered_sum(std::span<const double> xs);

/// Sample mean with jackknife standard error (equal to s / sqrt(R) for the mean).
Estimate mean_estimate(std::span<const double> samples);

/// Jackknife estimate of g(mean), e.g. g = sqrt for an RMS error.
Estimate jackknife_of_mean(std::span<const double> samples, const std::function<double(double)>& g);

/// sqrt(a^2 + b^2), the standard error of a difference of independent estimates.
double combined_stderr(const Estimate& a, const Estimate& b);

}  // namespace mfsde
