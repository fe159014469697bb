#include "blindmc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace blindmc {
namespace {

// ||P_{v-perp} u|| for unit u, v. Accurate near zero, unlike sqrt(1 - cos^2).
double residual_norm(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
  return (u - v * v.dot(u)).norm();
}

}  // namespace

double sin_angle(const Eigen::Ref<const Eigen::VectorXcd>& u,
                 const Eigen::Ref<const Eigen::VectorXcd>& v) {
  if (u.size() != v.size()) throw DimensionError("sin_angle: length mismatch");
  const double nu = u.norm(), nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw DomainError("sin_angle: zero vector");
  const Eigen::VectorXcd uh = u / nu;
  const Eigen::VectorXcd vh = v / nv;
  // Averaging both projections keeps the result exactly symmetric.
  const double s = 0.5 * (residual_norm(uh, vh) + residual_norm(vh, uh));
  return std::min(s, 1.0);
}

Flatness flatness(const Eigen::Ref<const Eigen::VectorXcd>& gains) {
  const double norm = gains.norm();
  if (!(norm > 0.0)) throw DomainError("flatness: zero gain vector");
  const double scale = std::sqrt(static_cast<double>(gains.size())) / norm;
  const Eigen::VectorXd mags = gains.cwiseAbs();
  return {scale * mags.maxCoeff(), scale * mags.minCoeff()};
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("percentile: empty list");
  if (!(p >= 0.0 && p <= 100.0)) throw DomainError("percentile: p must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<long>(std::ceil(p * n / 100.0)) - 1;
  rank = std::clamp(rank, 0L, static_cast<long>(values.size()) - 1);
  return values[static_cast<size_t>(rank)];
}

}  // namespace blindmc
