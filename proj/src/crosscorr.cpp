#include "blindmc/crosscorr.hpp"

#include <string>

#include "blindmc/signal.hpp"

namespace blindmc {
namespace {

thread_local std::uint64_t gram_calls = 0;

// Leading K x K corner of the circulant whose first column is c:
// out(r, s) = c[(r - s) mod L].
Eigen::MatrixXcd circulant_corner(const Eigen::VectorXcd& c, Index k) {
  const Index l = c.size();
  Eigen::MatrixXcd out(k, k);
  for (Index s = 0; s < k; ++s)
    for (Index r = 0; r < k; ++r) out(r, s) = c((r - s + l) % l);
  return out;
}

}  // namespace

Eigen::MatrixXcd hermitian_part(const Eigen::Ref<const Eigen::MatrixXcd>& h) {
  return 0.5 * (h + h.adjoint());
}

std::uint64_t gram_yy_invocations() { return gram_calls; }

// Y stacks one block row per pair i < j, with T_{y_j} = C_{y_j} S^T in column
// block i and -T_{y_i} in column block j. Summing the pair contributions to
// Y^*Y block by block:
//   (m, m):  every pair containing m contributes S C_{y_j}^* C_{y_j} S^T for
//            the partner j, so the block is sum_{j != m} S C_{y_j}^* C_{y_j} S^T;
//   (m, m'): only the pair {m, m'} touches both columns and it contributes
//            -S C_{y_m'}^* C_{y_m} S^T regardless of which index is smaller.
// C_{y_j}^* C_{y_i} is circulant with symbol conj(fft(y_j)) .* fft(y_i), so each
// block is the K x K corner of one inverse FFT.
GramYY gram_yy(const ObservationSet& obs, Index K) {
  ++gram_calls;
  obs.validate();
  const Index m_count = obs.channels();
  const Index l = obs.length();
  if (K < 1 || K > l) throw DimensionError("gram_yy: requires 1 <= K <= L");

  std::vector<Eigen::VectorXcd> spectra;
  spectra.reserve(static_cast<size_t>(m_count));
  for (const auto& y : obs.outputs) spectra.push_back(fft(y));

  Eigen::VectorXcd power_sum = Eigen::VectorXcd::Zero(l);
  std::vector<Eigen::VectorXcd> auto_spectra;
  for (const auto& yh : spectra) {
    auto_spectra.emplace_back(yh.cwiseAbs2().cast<Complex>());
    power_sum += auto_spectra.back();
  }

  GramYY gram{Eigen::MatrixXcd::Zero(m_count * K, m_count * K), m_count, K, l};
  for (Index m = 0; m < m_count; ++m) {
    const Eigen::VectorXcd others = power_sum - auto_spectra[static_cast<size_t>(m)];
    gram.mat.block(m * K, m * K, K, K) = circulant_corner(ifft(others), K);
    for (Index mp = m + 1; mp < m_count; ++mp) {
      const Eigen::VectorXcd symbol = spectra[static_cast<size_t>(mp)].conjugate().cwiseProduct(
          spectra[static_cast<size_t>(m)]);
      const Eigen::MatrixXcd blk = -circulant_corner(ifft(symbol), K);
      gram.mat.block(m * K, mp * K, K, K) = blk;
      gram.mat.block(mp * K, m * K, K, K) = blk.adjoint();
    }
  }
  gram.mat = hermitian_part(gram.mat);
  return gram;
}

RestrictedA build_A(const GramYY& gram, const BilinearBasis& basis, double sigma_hat_sq) {
  if (basis.channels() != gram.M || basis.support() != gram.K) {
    throw DimensionError("build_A: basis is " + std::to_string(basis.channels()) + " x " +
                         std::to_string(basis.support()) + " but Gram is for M=" +
                         std::to_string(gram.M) + ", K=" + std::to_string(gram.K));
  }
  if (!(sigma_hat_sq >= 0.0)) throw DomainError("build_A: noise variance must be nonnegative");
  const Index m_count = gram.M, k = gram.K, d = basis.dim();
  const double shift = sigma_hat_sq * static_cast<double>(m_count - 1) * static_cast<double>(gram.L);

  RestrictedA a{Eigen::MatrixXcd(m_count * d, m_count * d), sigma_hat_sq, m_count, d};
  for (Index m = 0; m < m_count; ++m) {
    for (Index mp = m; mp < m_count; ++mp) {
      Eigen::MatrixXcd g = gram.mat.block(m * k, mp * k, k, k);
      if (m == mp) g.diagonal().array() -= shift;
      const Eigen::MatrixXcd blk = basis.block(m).adjoint() * g * basis.block(mp);
      a.mat.block(m * d, mp * d, d, d) = blk;
      if (mp != m) a.mat.block(mp * d, m * d, d, d) = blk.adjoint();
    }
  }
  a.mat = hermitian_part(a.mat);
  return a;
}

// Row d of Gamma is sum_m C_{phi_{m,d}}^* y_m with phi_{m,d} the zero-padded
// column d of Phi_m, evaluated in the frequency domain.
Eigen::MatrixXcd build_gamma(const ObservationSet& obs, const BilinearBasis& basis) {
  obs.validate();
  const Index m_count = obs.channels();
  const Index l = obs.length();
  if (basis.channels() != m_count) throw DimensionError("build_gamma: basis/channel count mismatch");
  if (basis.support() > l) throw DimensionError("build_gamma: K exceeds L");
  const Index d = basis.dim();

  std::vector<Eigen::VectorXcd> spectra;
  for (const auto& y : obs.outputs) spectra.push_back(fft(y));

  Eigen::MatrixXcd gamma(d, l);
  for (Index j = 0; j < d; ++j) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(l);
    for (Index m = 0; m < m_count; ++m) {
      const Eigen::VectorXcd col = basis.block(m).col(j);
      acc += fft(embed(col, l)).conjugate().cwiseProduct(spectra[static_cast<size_t>(m)]);
    }
    gamma.row(j) = ifft(acc).transpose();
  }
  return gamma;
}

Eigen::MatrixXcd expected_A(const Eigen::VectorXcd& gains, const Eigen::VectorXcd& coeffs,
                            double x_norm_sq, Index K) {
  const double b_sq = coeffs.squaredNorm();
  if (!(b_sq > 0.0)) throw DomainError("expected_A: zero coefficient vector");
  if (!(gains.squaredNorm() > 0.0)) throw DomainError("expected_A: zero gain vector");
  const Index m_count = gains.size(), d = coeffs.size();
  const double a_sq = gains.squaredNorm();
  const double scale = static_cast<double>(K) * static_cast<double>(K) * x_norm_sq * b_sq;

  const Eigen::MatrixXcd p_b = coeffs * coeffs.adjoint() / b_sq;
  const Eigen::MatrixXcd p_perp = Eigen::MatrixXcd::Identity(d, d) - p_b;

  Eigen::MatrixXcd out(m_count * d, m_count * d);
  for (Index m = 0; m < m_count; ++m) {
    for (Index mp = 0; mp < m_count; ++mp) {
      const Complex gain_outer = gains(m) * std::conj(gains(mp));
      const double diag_term = (m == mp) ? a_sq - std::norm(gains(m)) : 0.0;
      const Complex b_term = ((m == mp) ? Complex(a_sq) : Complex(0.0)) - gain_outer;
      out.block(m * d, mp * d, d, d) = scale * (diag_term * p_perp + b_term * p_b);
    }
  }
  return hermitian_part(out);
}

}  // namespace blindmc
