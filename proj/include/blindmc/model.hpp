#pragma once

// Bilinear channel model h_m = a_m * Phi_m * b, observation synthesis
// y_m = h_m (*) x + w_m, SNR calibration and seeded random instances.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "blindmc/types.hpp"

namespace blindmc {

/// The M blocks Phi_m (each K x D) of the block-diagonal basis Phi.
class BilinearBasis {
 public:
  BilinearBasis() = default;
  /// Throws DimensionError when blocks are empty or disagree in shape.
  explicit BilinearBasis(std::vector<Eigen::MatrixXcd> blocks);

  Index channels() const { return static_cast<Index>(blocks_.size()); }  // M
  Index support() const { return blocks_.empty() ? 0 : blocks_.front().rows(); }  // K
  Index dim() const { return blocks_.empty() ? 0 : blocks_.front().cols(); }  // D

  const Eigen::MatrixXcd& block(Index m) const { return blocks_[static_cast<size_t>(m)]; }
  const std::vector<Eigen::MatrixXcd>& blocks() const { return blocks_; }

  /// Phi * v for v in C^{MD}; the result is channel-major in C^{MK}.
  Eigen::VectorXcd apply(const Eigen::Ref<const Eigen::VectorXcd>& v) const;

  /// Dense MK x MD block-diagonal matrix. For tests and small problems.
  Eigen::MatrixXcd dense() const;

  /// Human-readable notes for parameter regimes outside the analysed one (D > K, M < 2).
  std::vector<std::string> warnings() const;

 private:
  std::vector<Eigen::MatrixXcd> blocks_;
};

/// Gains a, coefficients b and the derived responses h_m = a_m Phi_m b.
struct ChannelModel {
  Eigen::VectorXcd gains;
  Eigen::VectorXcd coeffs;
  std::vector<Eigen::VectorXcd> responses;

  Index channels() const { return gains.size(); }
  /// [h_1; h_2; ...; h_M] = Phi (a (x) b).
  Eigen::VectorXcd stacked() const;
};

struct ObservationSet {
  std::vector<ComplexSignal> outputs;
  /// Noise standard deviation when known (simulation); negative when unknown.
  double noise_sigma = -1.0;

  Index channels() const { return static_cast<Index>(outputs.size()); }
  Index length() const { return outputs.empty() ? 0 : outputs.front().size(); }
  bool noise_known() const { return noise_sigma >= 0.0; }

  /// Throws InputError for an empty set, unequal lengths or non-finite samples.
  void validate() const;
  std::vector<std::string> warnings(Index support) const;
};

struct InstanceConfig {
  Index M = 8;
  Index K = 64;
  Index D = 8;
  Index L = 1280;
  /// +inf gives noiseless observations.
  double snr_db = 20.0;
  double alpha = 0.5;
  std::uint64_t seed = 0;

  /// Throws InputError on D > K, K > L, M < 1, alpha outside [0, 1).
  void validate() const;
};

struct Instance {
  BilinearBasis basis;
  ChannelModel channels;
  ComplexSignal source;
  ObservationSet observations;
};

/// Random stream for one trial. Complex draws are CN(0,1): real and imaginary
/// parts independent N(0, 1/2).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Complex complex_normal();
  Eigen::VectorXcd complex_normal(Index n);
  Eigen::MatrixXcd complex_normal(Index rows, Index cols);
  /// Uniform on [-1, 1).
  double symmetric_uniform();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, std::sqrt(0.5)};
  std::uniform_real_distribution<double> uniform_{-1.0, 1.0};
};

/// SplitMix64 finalizer; mixes a master seed with stream indices.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

ChannelModel synthesize_channels(const BilinearBasis& basis, const Eigen::VectorXcd& gains,
                                 const Eigen::VectorXcd& coeffs);

/// y_m = embed(h_m, L) (*) x + w_m with w_m iid CN(0, sigma^2) entries.
ObservationSet synthesize_observations(const ChannelModel& model, const ComplexSignal& source,
                                       double noise_sigma, Rng& rng);

/// sigma_w = sqrt(K ||x||^2 ||u||^2 / (M L eta)); eta is a linear power ratio.
double snr_to_sigma(double x_norm_sq, double u_norm_sq, Index K, Index M, Index L, double eta);

inline double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }

/// Gaussian basis, source and coefficients, gains 1 + alpha * xi / ||xi||_inf.
Instance random_instance(const InstanceConfig& cfg);

}  // namespace blindmc
