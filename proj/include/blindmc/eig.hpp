#pragma once

#include "blindmc/types.hpp"

namespace blindmc {

struct EigenPair {
  double value = 0.0;
  /// Unit norm; largest-magnitude entry real and positive.
  Eigen::VectorXcd vector;
  /// Gap to the neighbouring eigenvalue below 1e-12 ||H||.
  bool degenerate = false;
};

/// Top singular triple V ~ sigma * left * right^T.
struct Rank1Factors {
  double sigma = 0.0;
  Eigen::VectorXcd left;
  Eigen::VectorXcd right;
};

/// Smallest eigenpair of a Hermitian matrix. Residual ||Hv - lv|| <= 1e-10 ||H||.
/// Throws InputError on non-finite input or asymmetry beyond 1e-8 relative.
EigenPair min_eig_vector(const Eigen::Ref<const Eigen::MatrixXcd>& h);

/// Largest eigenpair, computed as the negated smallest pair of -H.
EigenPair max_eig_vector(const Eigen::Ref<const Eigen::MatrixXcd>& h);

/// max |lambda| of a Hermitian matrix.
double spectral_norm(const Eigen::Ref<const Eigen::MatrixXcd>& h);

/// Best rank-1 approximation. The left factor is phase-normalized and the
/// right factor absorbs the conjugate phase, so sigma * left * right^T is unchanged.
Rank1Factors rank1_approx(const Eigen::Ref<const Eigen::MatrixXcd>& v);

/// Rotates v in place so its largest-magnitude entry (lowest index among ties
/// within 1e-12) is real positive. Returns the applied unit phase factor.
Complex phase_normalize(Eigen::VectorXcd& v);

}  // namespace blindmc
