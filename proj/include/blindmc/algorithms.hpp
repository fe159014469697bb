#pragma once

// Channel estimators: classical cross-convolution (CC), subspace-constrained
// CC (SCCC), spectral initialization, alternating eigenvectors (AltEig) and
// the rank-1 truncated power method (RTPM).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blindmc/crosscorr.hpp"
#include "blindmc/model.hpp"

namespace blindmc {

enum class Method { Cc, Sccc, AltEig, Rtpm };

std::string to_string(Method m);
/// Accepts cc, sccc, alteig, rtpm. Throws InputError otherwise.
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();

enum class SigmaHatMode { Exact, Zero, Value };
enum class GammaMode { ExpectedNorm, SampleNorm };

std::string to_string(SigmaHatMode m);
std::string to_string(GammaMode m);
GammaMode parse_gamma_mode(const std::string& name);

struct SolverConfig {
  int max_iters = 50;
  /// Stop once the sine of the angle between successive iterates drops below tol.
  double tol = 1e-10;
  SigmaHatMode sigma_hat_mode = SigmaHatMode::Zero;
  /// Used when sigma_hat_mode == Value (a variance, not a standard deviation).
  double sigma_hat_sq_value = 0.0;
  GammaMode gamma_mode = GammaMode::SampleNorm;

  void validate() const;
};

/// Simulation ground truth needed by the exact noise mode and the expected-norm shift.
struct GroundTruth {
  Eigen::VectorXcd gains;
  Eigen::VectorXcd coeffs;
  double source_norm_sq = 0.0;
  double noise_sigma = 0.0;
};

struct EstimateResult {
  Eigen::VectorXcd h_hat;                 // unit norm, length MK
  std::optional<Eigen::VectorXcd> a_hat;  // unit, length M (AltEig, RTPM)
  std::optional<Eigen::VectorXcd> b_hat;  // unit, length D (all but CC; SCCC takes the
                                          // right factor of its best rank-1 fit)
  /// Per-iteration sine of the angle between successive iterates.
  std::vector<double> trace;
  /// Per-iteration coefficient vectors v_t in C^{MD} (AltEig, RTPM).
  std::vector<Eigen::VectorXcd> iterates;
  /// Quadratic form v^* A v at each iterate (AltEig, RTPM).
  std::vector<double> objective;
  bool converged = true;
  bool degenerate = false;
  double elapsed = 0.0;  // seconds
};

/// Resolves the noise-variance estimate used in the shift terms.
double resolve_sigma_hat_sq(const SolverConfig& cfg, const ObservationSet& obs,
                            const GroundTruth* truth = nullptr);

/// v = kron(a, b) with a major: [a_1 b; a_2 b; ...].
Eigen::VectorXcd kron(const Eigen::Ref<const Eigen::VectorXcd>& a,
                      const Eigen::Ref<const Eigen::VectorXcd>& b);

/// M x D matrix whose row m is v[mD : (m+1)D]; mat(kron(a, b)) = a b^T.
Eigen::MatrixXcd mat(const Eigen::Ref<const Eigen::VectorXcd>& v, Index M, Index D);
/// Inverse of mat: row-major flattening.
Eigen::VectorXcd vec(const Eigen::Ref<const Eigen::MatrixXcd>& V);

/// (I_M (x) b)^* A (I_M (x) b): entries b^* A_{m,m'} b.
Eigen::MatrixXcd restrict_to_gains(const RestrictedA& A, const Eigen::VectorXcd& b);
/// (a (x) I_D)^* A (a (x) I_D) = sum_{m,m'} conj(a_m) a_m' A_{m,m'}.
Eigen::MatrixXcd restrict_to_coeffs(const RestrictedA& A, const Eigen::VectorXcd& a);

EstimateResult cc_estimate(const GramYY& gram);

EstimateResult sccc_estimate(const RestrictedA& A, const BilinearBasis& basis);
EstimateResult sccc_estimate(const GramYY& gram, const BilinearBasis& basis, double sigma_hat_sq);

struct SpectralInit {
  Eigen::VectorXcd b0;
  bool degenerate = false;
};

/// Top eigenvector of Gamma Gamma^* - s2 L sum_m Phi_m^* Phi_m.
SpectralInit spectral_init(const ObservationSet& obs, const BilinearBasis& basis,
                           double sigma_hat_sq);

EstimateResult alt_eig(const RestrictedA& A, const BilinearBasis& basis,
                       const Eigen::VectorXcd& b0, const SolverConfig& cfg);

/// Shift gamma for B = gamma I - A.
double rtpm_shift(const RestrictedA& A, GammaMode mode, const GroundTruth* truth, Index K);

EstimateResult rtpm(const RestrictedA& A, const BilinearBasis& basis, const Eigen::VectorXcd& b0,
                    double gamma, const SolverConfig& cfg);

struct MethodOutcome {
  std::optional<EstimateResult> result;
  std::string error;  // non-empty iff the method failed
};

struct EstimateReport {
  std::map<Method, MethodOutcome> outcomes;
  double sigma_hat_sq = 0.0;
  double gamma = 0.0;
  double gram_seconds = 0.0;
  double restrict_seconds = 0.0;
  double init_seconds = 0.0;
  bool init_degenerate = false;
};

/// Runs the requested methods on one shared Gram matrix and restricted matrix.
/// Per-method failures are recorded in the report; invalid input throws.
EstimateReport estimate_all(const ObservationSet& obs, const BilinearBasis& basis,
                            const SolverConfig& cfg, const std::vector<Method>& methods,
                            const GroundTruth* truth = nullptr);

}  // namespace blindmc
