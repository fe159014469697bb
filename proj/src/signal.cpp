#include "blindmc/signal.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace blindmc {
namespace {

// Eigen::FFT keeps a per-size plan cache, so each thread owns its engine.
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft_engine;
  return fft_engine;
}

Index largest_prime_factor(Index n) {
  Index largest = 1;
  for (Index p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      largest = p;
      n /= p;
    }
  }
  return n > 1 ? n : largest;
}

Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// kissfft handles a prime factor p with an O(p) generic butterfly per output,
// which degrades to O(L^2) for prime L. Above this factor, switch to Bluestein.
constexpr Index kBluesteinPrimeThreshold = 31;

// Chirp-z evaluation of the DFT with sign s (s = -1 forward, +1 backward, unscaled).
Eigen::VectorXcd bluestein(const Eigen::VectorXcd& x, int sign) {
  const Index n = x.size();
  const Index m = next_pow2(2 * n - 1);
  std::vector<Complex> chirp(static_cast<size_t>(n));
  for (Index k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for large n.
    const auto kk = static_cast<double>((k * k) % (2 * n));
    const double angle = std::numbers::pi * kk / static_cast<double>(n);
    chirp[static_cast<size_t>(k)] = std::polar(1.0, sign * angle);
  }
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(m);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(m);
  for (Index k = 0; k < n; ++k) a(k) = x(k) * chirp[static_cast<size_t>(k)];
  b(0) = std::conj(chirp[0]);
  for (Index k = 1; k < n; ++k) {
    b(k) = std::conj(chirp[static_cast<size_t>(k)]);
    b(m - k) = b(k);
  }
  Eigen::VectorXcd fa, fb, conv;
  engine().fwd(fa, a);
  engine().fwd(fb, b);
  Eigen::VectorXcd prod = fa.cwiseProduct(fb);
  engine().inv(conv, prod);
  Eigen::VectorXcd out(n);
  for (Index k = 0; k < n; ++k) out(k) = conv(k) * chirp[static_cast<size_t>(k)];
  return out;
}

}  // namespace

Eigen::VectorXcd fft(const Eigen::Ref<const Eigen::VectorXcd>& v) {
  if (v.size() < 1) throw DimensionError("fft: empty input");
  Eigen::VectorXcd in = v;
  if (in.size() == 1) return in;
  if (largest_prime_factor(in.size()) > kBluesteinPrimeThreshold) return bluestein(in, -1);
  Eigen::VectorXcd out;
  engine().fwd(out, in);
  return out;
}

Eigen::VectorXcd ifft(const Eigen::Ref<const Eigen::VectorXcd>& v) {
  if (v.size() < 1) throw DimensionError("ifft: empty input");
  Eigen::VectorXcd in = v;
  if (in.size() == 1) return in;
  if (largest_prime_factor(in.size()) > kBluesteinPrimeThreshold) {
    return bluestein(in, +1) / static_cast<double>(in.size());
  }
  Eigen::VectorXcd out;
  engine().inv(out, in);
  return out;
}

ComplexSignal circ_conv(const Eigen::Ref<const ComplexSignal>& u,
                        const Eigen::Ref<const ComplexSignal>& v) {
  if (u.size() != v.size()) {
    throw DimensionError("circ_conv: length mismatch " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  }
  return ifft(fft(u).cwiseProduct(fft(v)));
}

ComplexSignal circ_corr_adjoint(const Eigen::Ref<const ComplexSignal>& y,
                                const Eigen::Ref<const ComplexSignal>& z) {
  if (y.size() != z.size()) {
    throw DimensionError("circ_corr_adjoint: length mismatch " + std::to_string(y.size()) +
                         " vs " + std::to_string(z.size()));
  }
  return ifft(fft(y).conjugate().cwiseProduct(fft(z)));
}

void require_finite(const Eigen::Ref<const Eigen::VectorXcd>& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

}  // namespace blindmc
