#pragma once

#include <vector>

#include "blindmc/types.hpp"

namespace blindmc {

/// Sine of the principal angle between span(u) and span(v), in [0, 1].
/// Invariant to nonzero complex scaling of either argument. Throws DomainError
/// on a zero vector and DimensionError on a length mismatch.
double sin_angle(const Eigen::Ref<const Eigen::VectorXcd>& u,
                 const Eigen::Ref<const Eigen::VectorXcd>& v);

struct Flatness {
  double mu = 0.0;  // max_m sqrt(M) |a_m| / ||a||
  double nu = 0.0;  // min_m sqrt(M) |a_m| / ||a||
};

Flatness flatness(const Eigen::Ref<const Eigen::VectorXcd>& gains);

/// Nearest-rank percentile: sorted[ceil(p/100 n) - 1], clamped to the valid range.
double percentile(std::vector<double> values, double p);

}  // namespace blindmc
