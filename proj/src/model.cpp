#include "blindmc/model.hpp"

#include <cmath>

#include "blindmc/signal.hpp"

namespace blindmc {

BilinearBasis::BilinearBasis(std::vector<Eigen::MatrixXcd> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw DimensionError("BilinearBasis: no blocks");
  const Index k = blocks_.front().rows();
  const Index d = blocks_.front().cols();
  if (k < 1 || d < 1) throw DimensionError("BilinearBasis: empty block");
  for (const auto& b : blocks_) {
    if (b.rows() != k || b.cols() != d) {
      throw DimensionError("BilinearBasis: blocks must share a K x D shape");
    }
    if (!b.allFinite()) throw InputError("BilinearBasis: non-finite entry");
  }
}

Eigen::VectorXcd BilinearBasis::apply(const Eigen::Ref<const Eigen::VectorXcd>& v) const {
  const Index m_count = channels(), k = support(), d = dim();
  if (v.size() != m_count * d) throw DimensionError("BilinearBasis::apply: expected length MD");
  Eigen::VectorXcd out(m_count * k);
  for (Index m = 0; m < m_count; ++m) {
    out.segment(m * k, k).noalias() = block(m) * v.segment(m * d, d);
  }
  return out;
}

Eigen::MatrixXcd BilinearBasis::dense() const {
  const Index m_count = channels(), k = support(), d = dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m_count * k, m_count * d);
  for (Index m = 0; m < m_count; ++m) out.block(m * k, m * d, k, d) = block(m);
  return out;
}

std::vector<std::string> BilinearBasis::warnings() const {
  std::vector<std::string> notes;
  if (channels() < 2) notes.emplace_back("fewer than two channels: cross-convolution is void");
  if (dim() > support()) notes.emplace_back("subspace dimension D exceeds filter length K");
  return notes;
}

Eigen::VectorXcd ChannelModel::stacked() const {
  if (responses.empty()) return {};
  const Index k = responses.front().size();
  Eigen::VectorXcd out(k * static_cast<Index>(responses.size()));
  for (size_t m = 0; m < responses.size(); ++m) {
    out.segment(static_cast<Index>(m) * k, k) = responses[m];
  }
  return out;
}

void ObservationSet::validate() const {
  if (outputs.empty()) throw InputError("observation set is empty");
  const Index l = outputs.front().size();
  if (l < 1) throw InputError("observations have zero length");
  for (const auto& y : outputs) {
    if (y.size() != l) throw InputError("observations have unequal lengths");
    require_finite(y, "observation");
  }
}

std::vector<std::string> ObservationSet::warnings(Index support) const {
  std::vector<std::string> notes;
  if (length() < 3 * support) {
    notes.emplace_back("L < 3K: circular and linear convolution differ on the support");
  }
  return notes;
}

void InstanceConfig::validate() const {
  if (M < 1 || K < 1 || D < 1 || L < 1) throw InputError("M, K, D, L must be positive");
  if (D > K) throw InputError("D must not exceed K");
  if (K > L) throw InputError("K must not exceed L");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InputError("alpha must lie in [0, 1)");
  if (std::isnan(snr_db) || snr_db == -INFINITY) throw InputError("snr_db must be a number");
}

Complex Rng::complex_normal() {
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {re, im};
}

Eigen::VectorXcd Rng::complex_normal(Index n) {
  Eigen::VectorXcd v(n);
  for (Index i = 0; i < n; ++i) v(i) = complex_normal();
  return v;
}

Eigen::MatrixXcd Rng::complex_normal(Index rows, Index cols) {
  // Row-major fill so the draw order matches the basis file layout.
  Eigen::MatrixXcd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = complex_normal();
  return m;
}

double Rng::symmetric_uniform() { return uniform_(engine_); }

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

ChannelModel synthesize_channels(const BilinearBasis& basis, const Eigen::VectorXcd& gains,
                                 const Eigen::VectorXcd& coeffs) {
  if (gains.size() != basis.channels()) throw DimensionError("synthesize_channels: |a| != M");
  if (coeffs.size() != basis.dim()) throw DimensionError("synthesize_channels: |b| != D");
  ChannelModel model{gains, coeffs, {}};
  model.responses.reserve(static_cast<size_t>(gains.size()));
  for (Index m = 0; m < gains.size(); ++m) {
    model.responses.emplace_back(gains(m) * (basis.block(m) * coeffs));
  }
  return model;
}

ObservationSet synthesize_observations(const ChannelModel& model, const ComplexSignal& source,
                                       double noise_sigma, Rng& rng) {
  if (model.responses.empty()) throw DimensionError("synthesize_observations: no channels");
  const Index l = source.size();
  const Index k = model.responses.front().size();
  if (l < k) throw DimensionError("synthesize_observations: L < K");
  if (!(noise_sigma >= 0.0)) throw DomainError("noise level must be nonnegative");

  ObservationSet obs;
  obs.noise_sigma = noise_sigma;
  const Eigen::VectorXcd source_hat = fft(source);
  for (const auto& h : model.responses) {
    ComplexSignal y = ifft(fft(embed(h, l)).cwiseProduct(source_hat));
    if (noise_sigma > 0.0) y += noise_sigma * rng.complex_normal(l);
    obs.outputs.push_back(std::move(y));
  }
  return obs;
}

double snr_to_sigma(double x_norm_sq, double u_norm_sq, Index K, Index M, Index L, double eta) {
  if (!(eta > 0.0)) throw DomainError("snr_to_sigma: SNR must be positive");
  if (!(x_norm_sq > 0.0) || !(u_norm_sq > 0.0) || K < 1 || M < 1 || L < 1) {
    throw DomainError("snr_to_sigma: inputs must be positive");
  }
  if (std::isinf(eta)) return 0.0;
  return std::sqrt(static_cast<double>(K) * x_norm_sq * u_norm_sq /
                   (static_cast<double>(M) * static_cast<double>(L) * eta));
}

Instance random_instance(const InstanceConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(static_cast<size_t>(cfg.M));
  for (Index m = 0; m < cfg.M; ++m) blocks.push_back(rng.complex_normal(cfg.K, cfg.D));
  BilinearBasis basis(std::move(blocks));

  ComplexSignal source = rng.complex_normal(cfg.L);
  Eigen::VectorXcd coeffs = rng.complex_normal(cfg.D);

  Eigen::VectorXd xi(cfg.M);
  for (Index m = 0; m < cfg.M; ++m) xi(m) = rng.symmetric_uniform();
  Eigen::VectorXcd gains = Eigen::VectorXcd::Ones(cfg.M);
  const double xi_max = xi.cwiseAbs().maxCoeff();
  if (cfg.alpha > 0.0 && xi_max > 0.0) gains += (cfg.alpha / xi_max * xi).cast<Complex>();

  ChannelModel channels = synthesize_channels(basis, gains, coeffs);
  const double eta = db_to_ratio(cfg.snr_db);
  const double sigma =
      std::isinf(eta) ? 0.0
                      : snr_to_sigma(source.squaredNorm(), gains.squaredNorm() * coeffs.squaredNorm(),
                                     cfg.K, cfg.M, cfg.L, eta);
  ObservationSet obs = synthesize_observations(channels, source, sigma, rng);
  return {std::move(basis), std::move(channels), std::move(source), std::move(obs)};
}

}  // namespace blindmc
