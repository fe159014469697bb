#include "blindmc/sim.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "blindmc/metrics.hpp"

namespace blindmc {
namespace {

// Runs body(i) for i in [0, n) on a bounded pool. Each index writes only its
// own output slot, so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, int parallelism, Body body) {
  std::size_t workers = parallelism > 0 ? static_cast<std::size_t>(parallelism)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double aggregated_error(const MethodRecord& rec) { return rec.flagged() ? 1.0 : rec.sin_angle; }

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

TrialRecord run_trial(const InstanceConfig& cfg, const SolverConfig& solver,
                      const std::vector<Method>& methods) {
  if (methods.empty()) throw InputError("run_trial: no methods requested");
  cfg.validate();
  solver.validate();

  const Instance inst = random_instance(cfg);
  const GroundTruth truth{inst.channels.gains, inst.channels.coeffs, inst.source.squaredNorm(),
                          inst.observations.noise_sigma};
  const Eigen::VectorXcd h_true = inst.channels.stacked();

  TrialRecord record;
  record.seed = cfg.seed;
  record.config = cfg;
  record.noise_sigma = inst.observations.noise_sigma;

  EstimateReport report;
  try {
    report = estimate_all(inst.observations, inst.basis, solver, methods, &truth);
  } catch (const std::exception& e) {
    for (Method m : methods) {
      MethodRecord rec;
      rec.failed = true;
      rec.error = e.what();
      record.methods[m] = rec;
    }
    return record;
  }

  for (const auto& [method, outcome] : report.outcomes) {
    MethodRecord rec;
    if (!outcome.result) {
      rec.failed = true;
      rec.error = outcome.error;
      record.methods[method] = std::move(rec);
      continue;
    }
    const EstimateResult& est = *outcome.result;
    rec.sin_angle = sin_angle(est.h_hat, h_true);
    rec.h_hat = est.h_hat;
    rec.change_trace = est.trace;
    rec.objective = est.objective;
    for (const auto& v : est.iterates) {
      rec.error_trace.push_back(sin_angle(inst.basis.apply(v), h_true));
    }
    rec.seconds = est.elapsed;
    rec.degenerate = est.degenerate;
    rec.converged = est.converged;
    if (!std::isfinite(rec.sin_angle)) {
      rec.failed = true;
      rec.error = "non-finite estimate";
    }
    record.methods[method] = std::move(rec);
  }
  return record;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::L: return "L";
    case SweepAxis::D: return "D";
    case SweepAxis::M: return "M";
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::Alpha: return "alpha";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "L") return SweepAxis::L;
  if (name == "D") return SweepAxis::D;
  if (name == "M") return SweepAxis::M;
  if (name == "snr_db" || name == "snr-db" || name == "snr") return SweepAxis::SnrDb;
  if (name == "alpha") return SweepAxis::Alpha;
  throw InputError("unknown sweep axis '" + name + "' (expected L, D, M, snr_db or alpha)");
}

InstanceConfig with_axis_value(InstanceConfig cfg, SweepAxis axis, double value) {
  auto as_index = [&](const char* name) {
    if (!is_integral(value) || value < 1) {
      throw InputError(std::string("sweep value for ") + name + " must be a positive integer");
    }
    return static_cast<Index>(value);
  };
  switch (axis) {
    case SweepAxis::L: cfg.L = as_index("L"); break;
    case SweepAxis::D: cfg.D = as_index("D"); break;
    case SweepAxis::M: cfg.M = as_index("M"); break;
    case SweepAxis::SnrDb: cfg.snr_db = value; break;
    case SweepAxis::Alpha: cfg.alpha = value; break;
  }
  cfg.validate();
  return cfg;
}

void SweepSpec::validate() const {
  if (values.empty()) throw InputError("sweep needs at least one axis value");
  if (n_trials < 1) throw InputError("sweep needs at least one trial");
  if (methods.empty()) throw InputError("sweep needs at least one method");
  if (!(percentile_p >= 0.0 && percentile_p <= 100.0)) throw InputError("percentile must lie in [0, 100]");
  solver.validate();
  for (double v : values) (void)with_axis_value(base, axis, v);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t axis_index, std::size_t trial_index) {
  return derive_seed(master, axis_index, trial_index);
}

SweepResult run_sweep(const SweepSpec& spec, int parallelism) {
  spec.validate();
  const std::size_t n_points = spec.values.size();
  const auto n_trials = static_cast<std::size_t>(spec.n_trials);

  SweepResult result;
  result.trials.assign(n_points, std::vector<TrialRecord>(n_trials));
  parallel_for(n_points * n_trials, parallelism, [&](std::size_t job) {
    const std::size_t point = job / n_trials, trial = job % n_trials;
    InstanceConfig cfg = with_axis_value(spec.base, spec.axis, spec.values[point]);
    cfg.seed = trial_seed(spec.base.seed, point, trial);
    result.trials[point][trial] = run_trial(cfg, spec.solver, spec.methods);
  });

  result.errors.resize(n_points);
  for (std::size_t point = 0; point < n_points; ++point) {
    for (Method m : spec.methods) {
      std::vector<double> errs;
      int failed = 0;
      for (const auto& rec : result.trials[point]) {
        const MethodRecord& mr = rec.methods.at(m);
        errs.push_back(aggregated_error(mr));
        failed += mr.flagged() ? 1 : 0;
      }
      result.rows.push_back({spec.values[point], m, percentile(errs, spec.percentile_p), failed});
      result.errors[point][m] = std::move(errs);
    }
  }
  return result;
}

void GridSpec::validate() const {
  if (d_over_k.empty() || l_over_k.empty()) throw InputError("grid needs D/K and L/K values");
  if (n_trials < 1) throw InputError("grid needs at least one trial");
  if (methods.empty()) throw InputError("grid needs at least one method");
  if (K < 1 || M < 1) throw InputError("grid needs positive K and M");
  for (double v : d_over_k)
    if (!(v > 0.0)) throw InputError("D/K values must be positive");
  for (double v : l_over_k)
    if (!(v > 0.0)) throw InputError("L/K values must be positive");
  solver.validate();
}

std::pair<Index, Index> grid_dims(const GridSpec& spec, double d_over_k, double l_over_k,
                                  std::vector<std::string>* warnings) {
  auto note = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  const double k = static_cast<double>(spec.K);
  const double d_raw = d_over_k * k;
  const double l_raw = l_over_k * k;
  auto d = static_cast<Index>(std::floor(d_raw));
  auto l = static_cast<Index>(std::floor(l_raw));
  if (!is_integral(d_raw)) {
    note("D/K=" + format_double(d_over_k) + " gives D=" + format_double(d_raw) + "; rounded down");
  }
  if (!is_integral(l_raw)) {
    note("L/K=" + format_double(l_over_k) + " gives L=" + format_double(l_raw) + "; rounded down");
  }
  if (d < 1) {
    note("D/K=" + format_double(d_over_k) + " clamped to D=1");
    d = 1;
  }
  if (d > spec.K) {
    note("D/K=" + format_double(d_over_k) + " clamped to D=K");
    d = spec.K;
  }
  if (l < spec.K) {
    note("L/K=" + format_double(l_over_k) + " clamped to L=K");
    l = spec.K;
  }
  return {d, l};
}

GridResult run_grid(const GridSpec& spec, int parallelism) {
  spec.validate();
  GridResult result;
  const std::size_t nd = spec.d_over_k.size(), nl = spec.l_over_k.size();
  const auto n_trials = static_cast<std::size_t>(spec.n_trials);

  std::vector<std::pair<Index, Index>> dims;
  for (double d : spec.d_over_k)
    for (double l : spec.l_over_k) dims.push_back(grid_dims(spec, d, l, &result.warnings));

  std::vector<std::vector<TrialRecord>> trials(nd * nl, std::vector<TrialRecord>(n_trials));
  parallel_for(nd * nl * n_trials, parallelism, [&](std::size_t job) {
    const std::size_t cell = job / n_trials, trial = job % n_trials;
    InstanceConfig cfg;
    cfg.M = spec.M;
    cfg.K = spec.K;
    cfg.D = dims[cell].first;
    cfg.L = dims[cell].second;
    cfg.snr_db = spec.snr_db;
    cfg.alpha = spec.alpha;
    cfg.seed = trial_seed(spec.seed, cell, trial);
    trials[cell][trial] = run_trial(cfg, spec.solver, spec.methods);
  });

  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t j = 0; j < nl; ++j) {
      const std::size_t cell = i * nl + j;
      for (Method m : spec.methods) {
        std::vector<double> errs;
        int failed = 0;
        for (const auto& rec : trials[cell]) {
          const MethodRecord& mr = rec.methods.at(m);
          errs.push_back(aggregated_error(mr));
          failed += mr.flagged() ? 1 : 0;
        }
        // Exact recovery gives sin angle 0; floor it so the log stays finite.
        const double err = std::max(percentile(errs, spec.percentile_p), 1e-300);
        result.cells.push_back({spec.d_over_k[i], spec.l_over_k[j], dims[cell].first,
                                dims[cell].second, m, std::log10(err), failed});
      }
    }
  }
  return result;
}

Eigen::MatrixXd GridResult::matrix(Method m, std::size_t n_d, std::size_t n_l) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(static_cast<Index>(n_d), static_cast<Index>(n_l),
                                                  std::nan(""));
  std::size_t idx = 0;
  for (const auto& c : cells) {
    if (c.method != m) continue;
    const std::size_t i = idx / n_l, j = idx % n_l;
    if (i < n_d) out(static_cast<Index>(i), static_cast<Index>(j)) = c.log10_error;
    ++idx;
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "axis_value,method,percentile_error,n_failed\n";
  for (const auto& row : result.rows) {
    os << format_double(row.axis_value) << ',' << to_string(row.method) << ','
       << format_double(row.percentile_error) << ',' << row.n_failed << '\n';
  }
  return os.str();
}

std::string grid_csv(const GridResult& result) {
  std::ostringstream os;
  os << "d_over_k,l_over_k,method,log10_error\n";
  for (const auto& c : result.cells) {
    os << format_double(c.d_over_k) << ',' << format_double(c.l_over_k) << ',' << to_string(c.method)
       << ',' << format_double(c.log10_error) << '\n';
  }
  return os.str();
}

}  // namespace blindmc
