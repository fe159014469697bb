#pragma once

// Signal kernels: DFT, circular convolution and its adjoint, the flip
// operator modulo L, and the time-limiting maps between C^K and C^L.
//
// DFT convention: the forward transform is unnormalized and the inverse
// carries 1/L, so circ_conv(u, v) = ifft(fft(u) .* fft(v)) with no extra
// scale and ||fft(v)||^2 = L ||v||^2.

#include <string>

#include "blindmc/types.hpp"

namespace blindmc {

/// Unnormalized forward DFT of any length >= 1.
Eigen::VectorXcd fft(const Eigen::Ref<const Eigen::VectorXcd>& v);

/// Inverse DFT, scaled by 1/L.
Eigen::VectorXcd ifft(const Eigen::Ref<const Eigen::VectorXcd>& v);

/// w[n] = sum_k u[k] v[(n - k) mod L].
ComplexSignal circ_conv(const Eigen::Ref<const ComplexSignal>& u,
                        const Eigen::Ref<const ComplexSignal>& v);

/// C_y^* z, the adjoint of convolution by y: out[k] = sum_n conj(y[n]) z[(n + k) mod L].
ComplexSignal circ_corr_adjoint(const Eigen::Ref<const ComplexSignal>& y,
                                const Eigen::Ref<const ComplexSignal>& z);

/// J v with J = [e_1, e_L, e_{L-1}, ..., e_2]: out[0] = v[0], out[k] = v[L - k].
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> flip(
    const Eigen::MatrixBase<Derived>& v) {
  const Index n = v.size();
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(n);
  if (n == 0) return out;
  out(0) = v(0);
  for (Index k = 1; k < n; ++k) out(k) = v(n - k);
  return out;
}

/// Zero-pads a length-K vector to length L (action of S^T).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> embed(
    const Eigen::MatrixBase<Derived>& v, Index length) {
  if (v.size() > length) {
    throw DimensionError("embed: input length " + std::to_string(v.size()) +
                         " exceeds target length " + std::to_string(length));
  }
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>::Zero(length);
  out.head(v.size()) = v;
  return out;
}

/// Keeps the leading K entries (action of S).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> restrict(
    const Eigen::MatrixBase<Derived>& v, Index support) {
  if (support > v.size() || support < 0) {
    throw DimensionError("restrict: support " + std::to_string(support) +
                         " exceeds signal length " + std::to_string(v.size()));
  }
  return v.head(support);
}

/// The time-limiting operator S : C^L -> C^K and its transpose.
struct TimeLimitMap {
  Index support;  // K
  Index length;   // L

  TimeLimitMap(Index k, Index l) : support(k), length(l) {
    if (k < 1 || l < 1 || k > l) {
      throw DimensionError("TimeLimitMap requires 1 <= K <= L");
    }
  }

  template <typename Derived>
  auto embed(const Eigen::MatrixBase<Derived>& v) const {
    if (v.size() != support) throw DimensionError("TimeLimitMap::embed: expected length K");
    return blindmc::embed(v, length);
  }

  template <typename Derived>
  auto restrict(const Eigen::MatrixBase<Derived>& v) const {
    if (v.size() != length) throw DimensionError("TimeLimitMap::restrict: expected length L");
    return blindmc::restrict(v, support);
  }
};

/// Throws InputError if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Eigen::VectorXcd>& v, const char* what);

}  // namespace blindmc
