#pragma once

// Structured matrices built from the channel outputs: the cross-convolution
// Gram matrix Y^*Y, its subspace restriction A, and the initialization matrix
// Gamma.

#include "blindmc/model.hpp"
#include "blindmc/types.hpp"

namespace blindmc {

/// Y^*Y for the pairwise cross-convolution system; Hermitian PSD, MK x MK.
struct GramYY {
  Eigen::MatrixXcd mat;
  Index M = 0;
  Index K = 0;
  Index L = 0;
};

/// A = Phi^* (Y^*Y - s2 (M-1) L I) Phi, Hermitian MD x MD.
struct RestrictedA {
  Eigen::MatrixXcd mat;
  double sigma_hat_sq = 0.0;
  Index M = 0;
  Index D = 0;

  auto block(Index m, Index mp) const { return mat.block(m * D, mp * D, D, D); }
};

/// Assembles Y^*Y from pairwise cross-correlations without forming Y.
GramYY gram_yy(const ObservationSet& obs, Index K);

/// Number of gram_yy calls made on the calling thread.
std::uint64_t gram_yy_invocations();

RestrictedA build_A(const GramYY& gram, const BilinearBasis& basis, double sigma_hat_sq);

/// Gamma = sum_m Phi_m^* S C_{y_m} J, a D x L matrix.
Eigen::MatrixXcd build_gamma(const ObservationSet& obs, const BilinearBasis& basis);

/// E[A] over Gaussian bases for noiseless data:
/// K^2 ||x||^2 ||b||^2 [ (||a||^2 I - diag|a|^2) (x) P_{b-perp} + (||a||^2 I - a a^*) (x) P_b ].
Eigen::MatrixXcd expected_A(const Eigen::VectorXcd& gains, const Eigen::VectorXcd& coeffs,
                            double x_norm_sq, Index K);

/// (H + H^*) / 2.
Eigen::MatrixXcd hermitian_part(const Eigen::Ref<const Eigen::MatrixXcd>& h);

}  // namespace blindmc
