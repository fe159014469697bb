#include "blindmc/algorithms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "blindmc/eig.hpp"
#include "blindmc/metrics.hpp"

namespace blindmc {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_unit(const Eigen::VectorXcd& v, Index expected, const char* what) {
  if (v.size() != expected) throw DimensionError(std::string(what) + ": wrong length");
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-8) {
    throw InputError(std::string(what) + ": initial vector must have unit norm");
  }
}

double quadratic_form(const RestrictedA& A, const Eigen::VectorXcd& v) {
  return v.dot(A.mat * v).real();
}

Eigen::VectorXcd unit_channels(const BilinearBasis& basis, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd h = basis.apply(v);
  const double n = h.norm();
  if (!(n > 0.0)) throw NumericalError("estimated channel vector vanished");
  return h / n;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Cc: return "cc";
    case Method::Sccc: return "sccc";
    case Method::AltEig: return "alteig";
    case Method::Rtpm: return "rtpm";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods())
    if (to_string(m) == name) return m;
  throw InputError("unknown method '" + name + "' (expected cc, sccc, alteig or rtpm)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::Cc, Method::Sccc, Method::AltEig, Method::Rtpm};
  return methods;
}

std::string to_string(SigmaHatMode m) {
  switch (m) {
    case SigmaHatMode::Exact: return "exact";
    case SigmaHatMode::Zero: return "zero";
    case SigmaHatMode::Value: return "value";
  }
  return "?";
}

std::string to_string(GammaMode m) {
  return m == GammaMode::ExpectedNorm ? "expected_norm" : "sample_norm";
}

GammaMode parse_gamma_mode(const std::string& name) {
  if (name == "expected_norm" || name == "expected") return GammaMode::ExpectedNorm;
  if (name == "sample_norm" || name == "sample") return GammaMode::SampleNorm;
  throw InputError("unknown gamma mode '" + name + "' (expected expected_norm or sample_norm)");
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (sigma_hat_mode == SigmaHatMode::Value && !(sigma_hat_sq_value >= 0.0)) {
    throw InputError("noise variance estimate must be nonnegative");
  }
}

double resolve_sigma_hat_sq(const SolverConfig& cfg, const ObservationSet& obs,
                            const GroundTruth* truth) {
  switch (cfg.sigma_hat_mode) {
    case SigmaHatMode::Zero: return 0.0;
    case SigmaHatMode::Value: return cfg.sigma_hat_sq_value;
    case SigmaHatMode::Exact:
      if (truth != nullptr) return truth->noise_sigma * truth->noise_sigma;
      if (obs.noise_known()) return obs.noise_sigma * obs.noise_sigma;
      throw InputError("exact noise variance requested but the noise level is unknown");
  }
  return 0.0;
}

Eigen::VectorXcd kron(const Eigen::Ref<const Eigen::VectorXcd>& a,
                      const Eigen::Ref<const Eigen::VectorXcd>& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Index m = 0; m < a.size(); ++m) out.segment(m * b.size(), b.size()) = a(m) * b;
  return out;
}

Eigen::MatrixXcd mat(const Eigen::Ref<const Eigen::VectorXcd>& v, Index M, Index D) {
  if (v.size() != M * D) throw DimensionError("mat: expected length M*D");
  Eigen::MatrixXcd out(M, D);
  for (Index m = 0; m < M; ++m) out.row(m) = v.segment(m * D, D).transpose();
  return out;
}

Eigen::VectorXcd vec(const Eigen::Ref<const Eigen::MatrixXcd>& V) {
  Eigen::VectorXcd out(V.size());
  for (Index m = 0; m < V.rows(); ++m) out.segment(m * V.cols(), V.cols()) = V.row(m).transpose();
  return out;
}

Eigen::MatrixXcd restrict_to_gains(const RestrictedA& A, const Eigen::VectorXcd& b) {
  if (b.size() != A.D) throw DimensionError("restrict_to_gains: |b| != D");
  Eigen::MatrixXcd out(A.M, A.M);
  for (Index m = 0; m < A.M; ++m)
    for (Index mp = 0; mp < A.M; ++mp) out(m, mp) = b.dot(A.block(m, mp) * b);
  return hermitian_part(out);
}

Eigen::MatrixXcd restrict_to_coeffs(const RestrictedA& A, const Eigen::VectorXcd& a) {
  if (a.size() != A.M) throw DimensionError("restrict_to_coeffs: |a| != M");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(A.D, A.D);
  for (Index m = 0; m < A.M; ++m)
    for (Index mp = 0; mp < A.M; ++mp) out += (std::conj(a(m)) * a(mp)) * A.block(m, mp);
  return hermitian_part(out);
}

EstimateResult cc_estimate(const GramYY& gram) {
  const auto start = Clock::now();
  const EigenPair pair = min_eig_vector(gram.mat);
  EstimateResult res;
  res.h_hat = pair.vector;
  res.degenerate = pair.degenerate;
  res.elapsed = seconds_since(start);
  return res;
}

EstimateResult sccc_estimate(const RestrictedA& A, const BilinearBasis& basis) {
  const auto start = Clock::now();
  const EigenPair pair = min_eig_vector(A.mat);
  EstimateResult res;
  res.h_hat = unit_channels(basis, pair.vector);
  Eigen::VectorXcd b = rank1_approx(mat(pair.vector, A.M, A.D)).right;
  res.b_hat = b / b.norm();
  res.degenerate = pair.degenerate;
  res.elapsed = seconds_since(start);
  return res;
}

EstimateResult sccc_estimate(const GramYY& gram, const BilinearBasis& basis, double sigma_hat_sq) {
  return sccc_estimate(build_A(gram, basis, sigma_hat_sq), basis);
}

SpectralInit spectral_init(const ObservationSet& obs, const BilinearBasis& basis,
                           double sigma_hat_sq) {
  if (!(sigma_hat_sq >= 0.0)) throw DomainError("spectral_init: noise variance must be nonnegative");
  const Eigen::MatrixXcd gamma = build_gamma(obs, basis);
  Eigen::MatrixXcd h = gamma * gamma.adjoint();
  if (sigma_hat_sq > 0.0) {
    Eigen::MatrixXcd noise = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
    for (const auto& blk : basis.blocks()) noise += blk.adjoint() * blk;
    h -= sigma_hat_sq * static_cast<double>(obs.length()) * noise;
  }
  const EigenPair pair = max_eig_vector(hermitian_part(h));
  return {pair.vector, pair.degenerate};
}

EstimateResult alt_eig(const RestrictedA& A, const BilinearBasis& basis,
                       const Eigen::VectorXcd& b0, const SolverConfig& cfg) {
  cfg.validate();
  require_unit(b0, A.D, "alt_eig");
  const auto start = Clock::now();
  EstimateResult res;
  res.converged = false;

  Eigen::VectorXcd b = b0;
  Eigen::VectorXcd a;
  Eigen::VectorXcd previous;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const EigenPair pa = min_eig_vector(restrict_to_gains(A, b));
    a = pa.vector;
    if (previous.size() == 0) previous = kron(a, b);
    const EigenPair pb = min_eig_vector(restrict_to_coeffs(A, a));
    b = pb.vector;
    res.degenerate = res.degenerate || pa.degenerate || pb.degenerate;

    Eigen::VectorXcd v = kron(a, b);
    const double change = sin_angle(v, previous);
    res.trace.push_back(change);
    res.objective.push_back(quadratic_form(A, v));
    res.iterates.push_back(v);
    previous = std::move(v);
    if (change < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.h_hat = unit_channels(basis, previous);
  res.a_hat = a;
  res.b_hat = b;
  res.elapsed = seconds_since(start);
  return res;
}

double rtpm_shift(const RestrictedA& A, GammaMode mode, const GroundTruth* truth, Index K) {
  if (mode == GammaMode::SampleNorm) return spectral_norm(A.mat);
  if (truth == nullptr) {
    throw InputError("expected_norm shift needs the simulation ground truth");
  }
  return spectral_norm(expected_A(truth->gains, truth->coeffs, truth->source_norm_sq, K));
}

EstimateResult rtpm(const RestrictedA& A, const BilinearBasis& basis, const Eigen::VectorXcd& b0,
                    double gamma, const SolverConfig& cfg) {
  cfg.validate();
  require_unit(b0, A.D, "rtpm");
  if (!std::isfinite(gamma)) throw InputError("rtpm: shift must be finite");
  const auto start = Clock::now();
  EstimateResult res;
  res.converged = false;

  // Gains from one alternating half-step, since the initializer only yields b.
  const EigenPair pa = min_eig_vector(restrict_to_gains(A, b0));
  res.degenerate = pa.degenerate;
  Eigen::VectorXcd v = kron(pa.vector, b0);
  Rank1Factors factors{1.0, pa.vector, b0};

  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::VectorXcd shifted = gamma * v - A.mat * v;
    factors = rank1_approx(mat(shifted, A.M, A.D));
    if (!(factors.sigma > 0.0)) throw NumericalError("rtpm: iterate vanished");
    Eigen::VectorXcd next = kron(factors.left, factors.right);
    next /= next.norm();
    const double change = sin_angle(next, v);
    v = std::move(next);
    res.trace.push_back(change);
    res.objective.push_back(quadratic_form(A, v));
    res.iterates.push_back(v);
    if (change < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.h_hat = unit_channels(basis, v);
  res.a_hat = factors.left;
  res.b_hat = factors.right;
  res.elapsed = seconds_since(start);
  return res;
}

EstimateReport estimate_all(const ObservationSet& obs, const BilinearBasis& basis,
                            const SolverConfig& cfg, const std::vector<Method>& methods,
                            const GroundTruth* truth) {
  obs.validate();
  cfg.validate();
  if (methods.empty()) throw InputError("no estimation method selected");
  if (basis.channels() != obs.channels()) {
    throw InputError("basis has " + std::to_string(basis.channels()) + " blocks but there are " +
                     std::to_string(obs.channels()) + " channel outputs");
  }
  if (basis.support() > obs.length()) throw InputError("filter length K exceeds observation length L");

  EstimateReport report;
  report.sigma_hat_sq = resolve_sigma_hat_sq(cfg, obs, truth);

  auto wants = [&](Method m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  };
  const bool need_a = wants(Method::Sccc) || wants(Method::AltEig) || wants(Method::Rtpm);
  const bool need_init = wants(Method::AltEig) || wants(Method::Rtpm);

  auto start = Clock::now();
  const GramYY gram = gram_yy(obs, basis.support());
  report.gram_seconds = seconds_since(start);

  std::optional<RestrictedA> A;
  if (need_a) {
    start = Clock::now();
    A = build_A(gram, basis, report.sigma_hat_sq);
    report.restrict_seconds = seconds_since(start);
  }

  std::optional<SpectralInit> init;
  std::string init_error;
  if (need_init) {
    start = Clock::now();
    try {
      init = spectral_init(obs, basis, report.sigma_hat_sq);
      report.init_degenerate = init->degenerate;
    } catch (const std::exception& e) {
      init_error = std::string("spectral initialization failed: ") + e.what();
    }
    report.init_seconds = seconds_since(start);
  }

  for (Method m : all_methods()) {
    if (!wants(m)) continue;
    MethodOutcome outcome;
    try {
      switch (m) {
        case Method::Cc: outcome.result = cc_estimate(gram); break;
        case Method::Sccc: outcome.result = sccc_estimate(*A, basis); break;
        case Method::AltEig:
          if (!init) throw NumericalError(init_error);
          outcome.result = alt_eig(*A, basis, init->b0, cfg);
          break;
        case Method::Rtpm: {
          if (!init) throw NumericalError(init_error);
          report.gamma = rtpm_shift(*A, cfg.gamma_mode, truth, basis.support());
          outcome.result = rtpm(*A, basis, init->b0, report.gamma, cfg);
          break;
        }
      }
      if (outcome.result && (m == Method::AltEig || m == Method::Rtpm)) {
        outcome.result->degenerate = outcome.result->degenerate || report.init_degenerate;
      }
    } catch (const std::exception& e) {
      outcome.result.reset();
      outcome.error = e.what();
    }
    report.outcomes.emplace(m, std::move(outcome));
  }
  return report;
}

}  // namespace blindmc
