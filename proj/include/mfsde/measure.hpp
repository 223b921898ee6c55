#pragma once

#include "mfsde/core.hpp"
#include "mfsde/random.hpp"

#include <optional>

namespace mfsde {

/// Atomic probability measure sum_i w_i delta_{y_i}; atoms are the rows of an N x d array.
class EmpiricalMeasure {
 public:
  /// Uniform weights 1/N.
  explicit EmpiricalMeasure(Trajectory atoms);
  /// Explicit weights; must be nonnegative and sum to 1 within 1e-12.
  EmpiricalMeasure(Trajectory atoms, Eigen::VectorXd weights);

  Eigen::Index size() const noexcept { return atoms_.rows(); }
  int dim() const noexcept { return static_cast<int>(atoms_.cols()); }
  const Trajectory& atoms() const noexcept { return atoms_; }
  Vec atom(Eigen::Index i) const { return row_point(atoms_, i); }

  bool uniform() const noexcept { return !weights_.has_value(); }
  double weight(Eigen::Index i) const;

 private:
  Trajectory atoms_;
  std::optional<Eigen::VectorXd> weights_;
};

/// Uniform-weight measure on the rows of `positions`. Throws for N = 0.
EmpiricalMeasure empirical(Trajectory positions);

/// (sum_i w_i |y_i|^beta)^(1/beta).
double measure_moment(const EmpiricalMeasure& mu, double beta);

/// W_1 or W_2. Exact quantile coupling in d = 1; sliced estimate over
/// `projections` key-derived directions otherwise.
double wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, int order,
                   int projections = 64, const StreamKey& directions = StreamKey(0x51CEDULL));

}  // namespace mfsde
