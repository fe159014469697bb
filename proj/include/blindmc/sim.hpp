#pragma once

// Monte Carlo driver: seeded trials, one-axis sweeps and (D/K, L/K) grids.
// Every output is a pure function of the sweep or grid settings, independent of parallelism.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "blindmc/algorithms.hpp"
#include "blindmc/model.hpp"

namespace blindmc {

struct MethodRecord {
  /// sin angle to the true stacked channels; 1.0 when the method failed.
  /// Aggregates count flagged trials (failed or degenerate) as 1.0.
  double sin_angle = 1.0;
  /// Unit-norm channel estimate; empty on failure.
  Eigen::VectorXcd h_hat;
  /// sin angle to the truth after each iteration (AltEig, RTPM).
  std::vector<double> error_trace;
  /// sin angle between successive iterates.
  std::vector<double> change_trace;
  /// v^* A v at each iterate.
  std::vector<double> objective;
  double seconds = 0.0;
  bool degenerate = false;
  bool converged = true;
  bool failed = false;
  std::string error;

  bool flagged() const { return failed || degenerate; }
};

struct TrialRecord {
  std::uint64_t seed = 0;
  InstanceConfig config;
  double noise_sigma = 0.0;
  std::map<Method, MethodRecord> methods;
};

/// One seeded trial. Throws InputError for an invalid config or empty method list;
/// per-method failures are recorded, not thrown.
TrialRecord run_trial(const InstanceConfig& cfg, const SolverConfig& solver,
                      const std::vector<Method>& methods);

enum class SweepAxis { L, D, M, SnrDb, Alpha };
std::string to_string(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);

/// Returns cfg with the axis parameter set to value. Integer axes require integral values.
InstanceConfig with_axis_value(InstanceConfig cfg, SweepAxis axis, double value);

struct SweepSpec {
  InstanceConfig base;  // base.seed is the master seed
  SweepAxis axis = SweepAxis::L;
  std::vector<double> values;
  int n_trials = 100;
  std::vector<Method> methods = all_methods();
  double percentile_p = 95.0;
  SolverConfig solver;

  void validate() const;
};

struct SweepRow {
  double axis_value = 0.0;
  Method method = Method::Cc;
  double percentile_error = 0.0;
  int n_failed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// errors[axis_index][method] holds one sin angle per trial, in trial order.
  std::vector<std::map<Method, std::vector<double>>> errors;
  std::vector<std::vector<TrialRecord>> trials;
};

/// Seed of trial t at axis point i: derive_seed(master, i, t).
std::uint64_t trial_seed(std::uint64_t master, std::size_t axis_index, std::size_t trial_index);

/// parallelism <= 0 uses the hardware thread count.
SweepResult run_sweep(const SweepSpec& spec, int parallelism);

struct GridSpec {
  Index K = 64;
  Index M = 8;
  double snr_db = 20.0;
  double alpha = 0.5;
  std::vector<double> d_over_k;
  std::vector<double> l_over_k;
  int n_trials = 100;
  std::vector<Method> methods = all_methods();
  double percentile_p = 95.0;
  SolverConfig solver;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GridCell {
  double d_over_k = 0.0;
  double l_over_k = 0.0;
  Index D = 0;
  Index L = 0;
  Method method = Method::Cc;
  double log10_error = 0.0;
  int n_failed = 0;
};

struct GridResult {
  std::vector<GridCell> cells;
  /// Clamping and rounding notices for D and L.
  std::vector<std::string> warnings;

  /// log10 errors for one method as a (d_over_k x l_over_k) matrix.
  Eigen::MatrixXd matrix(Method m, std::size_t n_d, std::size_t n_l) const;
};

/// Resolves D = floor(d/k * K) >= 1 and L = floor(l/k * K) >= K, recording warnings.
std::pair<Index, Index> grid_dims(const GridSpec& spec, double d_over_k, double l_over_k,
                                  std::vector<std::string>* warnings);

GridResult run_grid(const GridSpec& spec, int parallelism);

/// `axis_value,method,percentile_error,n_failed`
std::string sweep_csv(const SweepResult& result);
/// `d_over_k,l_over_k,method,log10_error`
std::string grid_csv(const GridResult& result);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace blindmc
