#include "mfsde/stats.hpp"

#include "mfsde/core.hpp"

#include <cmath>
#include <vector>

namespace mfsde {

double ordered_sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

Estimate mean_estimate(std::span<const double> samples) {
  return jackknife_of_mean(samples, [](double m) { return m; });
}

Estimate jackknife_of_mean(std::span<const double> samples, const std::function<double(double)>& g) {
  const auto n = static_cast<int>(samples.size());
  if (n == 0) throw InvalidArgument("cannot estimate from zero samples");
  const double total = ordered_sum(samples);
  Estimate out;
  out.value = g(total / n);
  out.replications = n;
  if (n < 2) return out;

  std::vector<double> loo(samples.size());
  for (int i = 0; i < n; ++i) loo[i] = g((total - samples[i]) / (n - 1));
  const double loo_mean = ordered_sum(loo) / n;
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  out.std_error = std::sqrt(ss * (n - 1) / n);
  return out;
}

double combined_stderr(const Estimate& a, const Estimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

}  // namespace mfsde
