#include "mfsde/core.hpp"

#include <sstream>

namespace mfsde {

namespace {

std::string describe_failure(int step, double t, const Vec& x, int particle) {
  std::ostringstream os;
  os << "non-finite coefficient at step " << step << ", t=" << t;
  if (particle >= 0) os << ", particle " << particle;
  os << ", x=(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x(i);
  os << ")";
  return os.str();
}

}  // namespace

NumericFailure::NumericFailure(int step, double t, Vec x, int particle)
    : std::runtime_error(describe_failure(step, t, x, particle)),
      step_(step),
      t_(t),
      x_(std::move(x)),
      particle_(particle) {}

BoundViolation::BoundViolation(int step, const std::string& what)
    : std::runtime_error("bound violation at step " + std::to_string(step) + ": " + what),
      step_(step) {}

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double gram_determinant(const Mat& m) {
  const Mat gram = m * m.transpose();
  if (gram.rows() <= 3) return gram.determinant();
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto diag = llt.matrixL().toDenseMatrix().diagonal();
  double det = 1.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) det *= diag(i) * diag(i);
  return det;
}

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace mfsde
