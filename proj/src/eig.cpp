#include "blindmc/eig.hpp"

#include <cmath>

namespace blindmc {
namespace {

constexpr double kHermitianTol = 1e-8;
constexpr double kResidualTol = 1e-10;
constexpr double kDegenerateGap = 1e-12;

void check_hermitian(const Eigen::Ref<const Eigen::MatrixXcd>& h) {
  if (h.rows() != h.cols() || h.rows() < 1) throw InputError("eigensolver: matrix must be square");
  if (!h.allFinite()) throw InputError("eigensolver: non-finite entry");
  const double scale = h.norm();
  if ((h - h.adjoint()).norm() > kHermitianTol * scale) {
    throw InputError("eigensolver: matrix is not Hermitian");
  }
}

}  // namespace

Complex phase_normalize(Eigen::VectorXcd& v) {
  if (v.size() == 0) return 1.0;
  const double top = v.cwiseAbs().maxCoeff();
  if (top == 0.0) return 1.0;
  Index pick = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= top - 1e-12) {
      pick = i;
      break;
    }
  }
  const Complex phase = std::conj(v(pick)) / std::abs(v(pick));
  v *= phase;
  v(pick) = Complex(v(pick).real(), 0.0);
  return phase;
}

EigenPair min_eig_vector(const Eigen::Ref<const Eigen::MatrixXcd>& h) {
  check_hermitian(h);
  // Householder tridiagonalization followed by implicit symmetric QR.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const auto& values = solver.eigenvalues();
  const Index n = values.size();
  const double norm = std::max(std::abs(values(0)), std::abs(values(n - 1)));

  EigenPair pair;
  pair.value = values(0);
  pair.vector = solver.eigenvectors().col(0);
  pair.vector.normalize();
  phase_normalize(pair.vector);
  pair.degenerate = n > 1 && (values(1) - values(0)) <= kDegenerateGap * norm;

  const double residual = (h * pair.vector - pair.value * pair.vector).norm();
  if (residual > kResidualTol * norm && residual > 0.0) {
    throw NumericalError("eigensolver residual " + std::to_string(residual) +
                         " exceeds tolerance");
  }
  return pair;
}

EigenPair max_eig_vector(const Eigen::Ref<const Eigen::MatrixXcd>& h) {
  EigenPair pair = min_eig_vector(-h);
  pair.value = -pair.value;
  return pair;
}

double spectral_norm(const Eigen::Ref<const Eigen::MatrixXcd>& h) {
  check_hermitian(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Rank1Factors rank1_approx(const Eigen::Ref<const Eigen::MatrixXcd>& v) {
  Rank1Factors out;
  if (v.rows() < 1 || v.cols() < 1) throw DimensionError("rank1_approx: empty matrix");
  if (v.norm() == 0.0) {
    out.left = Eigen::VectorXcd::Unit(v.rows(), 0);
    out.right = Eigen::VectorXcd::Unit(v.cols(), 0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.sigma = svd.singularValues()(0);
  out.left = svd.matrixU().col(0);
  out.right = svd.matrixV().col(0).conjugate();
  const Complex phase = phase_normalize(out.left);
  out.right *= std::conj(phase);
  return out;
}

}  // namespace blindmc
