#pragma once

#include <cmath>
#include <random>

#include "blindmc/model.hpp"

namespace blindmc::test {

inline Eigen::VectorXcd random_vector(Index n, std::uint64_t seed) {
  Rng rng(seed);
  return rng.complex_normal(n);
}

inline Eigen::MatrixXcd random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return rng.complex_normal(rows, cols);
}

inline Eigen::MatrixXcd random_hermitian(Index n, std::uint64_t seed) {
  const Eigen::MatrixXcd g = random_matrix(n, n, seed);
  return 0.5 * (g + g.adjoint());
}

inline double rel_err(const Eigen::MatrixXcd& got, const Eigen::MatrixXcd& want) {
  const double denom = want.norm();
  return denom == 0.0 ? got.norm() : (got - want).norm() / denom;
}

inline Instance noiseless_instance(Index M, Index K, Index D, Index L, std::uint64_t seed,
                                   double alpha = 0.5) {
  InstanceConfig cfg{M, K, D, L, INFINITY, alpha, seed};
  return random_instance(cfg);
}

}  // namespace blindmc::test
