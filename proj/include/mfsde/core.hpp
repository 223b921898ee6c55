#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mfsde {

/// Largest state dimension supported by the stack-allocated point/matrix types.
inline constexpr int kMaxDim = 8;

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

template <typename Scalar>
using SquareT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                              kMaxDim, kMaxDim>;

/// Rows are time nodes (or particles), columns are coordinates.
template <typename Scalar>
using RowsT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vec = PointT<double>;
using Mat = SquareT<double>;
using Trajectory = RowsT<double>;

// ---------------------------------------------------------------------------
// Error types

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DegenerateFamily : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A coefficient produced a NaN/inf. Carries the coordinates of the failing step.
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(int step, double t, Vec x, int particle = -1);

  int step() const noexcept { return step_; }
  double time() const noexcept { return t_; }
  const Vec& state() const noexcept { return x_; }
  int particle() const noexcept { return particle_; }

 private:
  int step_;
  double t_;
  Vec x_;
  int particle_;
};

/// A discretized Ito coefficient left the declared kappa0/kappa1 envelope.
class BoundViolation : public std::runtime_error {
 public:
  BoundViolation(int step, const std::string& what);
  int step() const noexcept { return step_; }

 private:
  int step_;
};

// ---------------------------------------------------------------------------
// Small dense helpers

/// Spectral norm (largest singular value).
double operator_norm(const Mat& m);

/// det(m m^T); explicit for d <= 3, Cholesky-based otherwise (0 if not positive definite).
double gram_determinant(const Mat& m);

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

inline Vec row_point(const Trajectory& rows, Eigen::Index k) {
  return rows.row(k).transpose();
}

}  // namespace mfsde
