#include "mfsde/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mfsde {

EmpiricalMeasure::EmpiricalMeasure(Trajectory atoms) : atoms_(std::move(atoms)) {
  if (atoms_.rows() == 0) throw InvalidArgument("empirical measure needs at least one atom");
}

EmpiricalMeasure::EmpiricalMeasure(Trajectory atoms, Eigen::VectorXd weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.rows() == 0) throw InvalidArgument("empirical measure needs at least one atom");
  if (weights_->size() != atoms_.rows()) throw InvalidArgument("one weight per atom required");
  if ((weights_->array() < 0.0).any()) throw InvalidArgument("weights must be nonnegative");
  if (std::abs(weights_->sum() - 1.0) > 1e-12) throw InvalidArgument("weights must sum to 1");
}

double EmpiricalMeasure::weight(Eigen::Index i) const {
  return weights_ ? (*weights_)(i) : 1.0 / static_cast<double>(atoms_.rows());
}

EmpiricalMeasure empirical(Trajectory positions) { return EmpiricalMeasure(std::move(positions)); }

double measure_moment(const EmpiricalMeasure& mu, double beta) {
  if (beta < 1.0) throw InvalidArgument("moment order must be >= 1");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    acc += mu.weight(i) * std::pow(mu.atoms().row(i).norm(), beta);
  }
  return std::pow(acc, 1.0 / beta);
}

namespace {

struct WeightedPoint {
  double x;
  double w;
};

std::vector<WeightedPoint> sorted_line(const std::vector<double>& xs, const EmpiricalMeasure& mu) {
  std::vector<WeightedPoint> pts(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pts[i] = {xs[i], mu.weight(static_cast<Eigen::Index>(i))};
  std::stable_sort(pts.begin(), pts.end(),
                   [](const WeightedPoint& a, const WeightedPoint& b) { return a.x < b.x; });
  return pts;
}

// W_p^p between two measures on the line via the monotone (quantile) coupling.
double line_cost(const std::vector<double>& xs, const EmpiricalMeasure& mu,
                 const std::vector<double>& ys, const EmpiricalMeasure& nu, int order) {
  auto a = sorted_line(xs, mu);
  auto b = sorted_line(ys, nu);
  if (mu.uniform() && nu.uniform() && a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i].x - b[i].x), order);
    return acc / static_cast<double>(a.size());
  }
  double acc = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  double left_a = a[0].w;
  double left_b = b[0].w;
  while (i < a.size() && j < b.size()) {
    const double mass = std::min(left_a, left_b);
    acc += mass * std::pow(std::abs(a[i].x - b[j].x), order);
    left_a -= mass;
    left_b -= mass;
    if (left_a <= 1e-15 && ++i < a.size()) left_a += a[i].w;
    if (left_b <= 1e-15 && ++j < b.size()) left_b += b[j].w;
  }
  return acc;
}

std::vector<double> project(const EmpiricalMeasure& mu, const Vec& direction) {
  std::vector<double> out(static_cast<std::size_t>(mu.size()));
  for (Eigen::Index i = 0; i < mu.size(); ++i) out[i] = mu.atoms().row(i).dot(direction.transpose());
  return out;
}

}  // namespace

double wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, int order, int projections,
                   const StreamKey& directions) {
  if (order != 1 && order != 2) throw InvalidArgument("wasserstein order must be 1 or 2");
  if (mu.dim() != nu.dim()) throw InvalidArgument("measures live in different dimensions");
  if (mu.size() != nu.size() && (!mu.uniform() || !nu.uniform())) {
    throw Unsupported("exact line coupling needs equal atom counts or uniform weights");
  }
  const int d = mu.dim();
  if (d == 1) {
    Vec e1 = Vec::Ones(1);
    return std::pow(line_cost(project(mu, e1), mu, project(nu, e1), nu, order), 1.0 / order);
  }
  if (projections < 1) throw InvalidArgument("sliced estimate needs at least one projection");
  double acc = 0.0;
  for (int q = 0; q < projections; ++q) {
    CounterRng rng(directions.with("projection", q));
    Vec dir(d);
    for (int c = 0; c < d; ++c) dir(c) = rng.normal(static_cast<std::uint64_t>(c));
    dir /= dir.norm();
    acc += line_cost(project(mu, dir), mu, project(nu, dir), nu, order);
  }
  return std::pow(acc / projections, 1.0 / order);
}

}  // namespace mfsde
