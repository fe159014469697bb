#include "blindmc/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "blindmc/algorithms.hpp"
#include "blindmc/crosscorr.hpp"
#include "blindmc/io.hpp"
#include "blindmc/sim.hpp"
#include "blindmc/testing/oracles.hpp"

namespace blindmc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Files are staged in memory and only written once the command has succeeded.
using OutputSet = std::map<std::string, std::string>;

struct InstanceFlags {
  Index M = 8, K = 64, D = 8, L = 1280;
  std::string snr_db = "20";
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

struct SolverFlags {
  std::string sigma_hat;
  std::string gamma_mode;
  int max_iters = 50;
  double tol = 1e-10;
};

void add_instance_flags(CLI::App* app, InstanceFlags& f) {
  app->add_option("--M", f.M, "number of channels")->capture_default_str();
  app->add_option("--K", f.K, "impulse response length")->capture_default_str();
  app->add_option("--D", f.D, "subspace dimension")->capture_default_str();
  app->add_option("--L", f.L, "observation length")->capture_default_str();
  app->add_option("--snr-db", f.snr_db, "SNR in dB (inf for noiseless)")->capture_default_str();
  app->add_option("--alpha", f.alpha, "gain spread in [0, 1)")->capture_default_str();
  app->add_option("--seed", f.seed, "master seed (BLINDMC_SEED overrides)")->capture_default_str();
}

void add_solver_flags(CLI::App* app, SolverFlags& f, const std::string& sigma_default,
                      const std::string& gamma_default) {
  f.sigma_hat = sigma_default;
  f.gamma_mode = gamma_default;
  app->add_option("--sigma-hat", f.sigma_hat,
                  "noise variance estimate: exact, zero, or a numeric variance")
      ->capture_default_str();
  app->add_option("--gamma-mode", f.gamma_mode, "RTPM shift: expected_norm or sample_norm")
      ->capture_default_str();
  app->add_option("--max-iters", f.max_iters, "iteration cap")->capture_default_str();
  app->add_option("--tol", f.tol, "stop when successive iterates differ by less (sin angle)")
      ->capture_default_str();
}

double parse_snr(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "Inf") return INFINITY;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InputError("--snr-db expects a number or inf, got '" + text + "'");
  }
}

InstanceConfig to_config(const InstanceFlags& f) {
  InstanceConfig cfg{f.M, f.K, f.D, f.L, parse_snr(f.snr_db), f.alpha, f.seed};
  if (const char* env = std::getenv("BLINDMC_SEED"); env != nullptr && *env != '\0') {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw InputError(std::string("BLINDMC_SEED is not an unsigned integer: ") + env);
    }
  }
  cfg.validate();
  return cfg;
}

SolverConfig to_solver(const SolverFlags& f) {
  SolverConfig cfg;
  cfg.max_iters = f.max_iters;
  cfg.tol = f.tol;
  if (f.sigma_hat == "exact") {
    cfg.sigma_hat_mode = SigmaHatMode::Exact;
  } else if (f.sigma_hat == "zero") {
    cfg.sigma_hat_mode = SigmaHatMode::Zero;
  } else {
    try {
      std::size_t used = 0;
      cfg.sigma_hat_sq_value = std::stod(f.sigma_hat, &used);
      if (used != f.sigma_hat.size()) throw std::invalid_argument(f.sigma_hat);
    } catch (const std::exception&) {
      throw InputError("--sigma-hat expects exact, zero or a number, got '" + f.sigma_hat + "'");
    }
    cfg.sigma_hat_mode = SigmaHatMode::Value;
  }
  cfg.gamma_mode = parse_gamma_mode(f.gamma_mode);
  cfg.validate();
  return cfg;
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw InputError("no methods given");
  return out;
}

std::vector<double> parse_values(const std::string& list, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw InputError(std::string(flag) + " needs at least one value");
  return out;
}

json complex_array(const Eigen::VectorXcd& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

Eigen::VectorXcd complex_vector(const json& arr) {
  Eigen::VectorXcd v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v(static_cast<Index>(i)) = Complex(arr.at(i).at(0).get<double>(), arr.at(i).at(1).get<double>());
  }
  return v;
}

json instance_json(const InstanceConfig& c) {
  return {{"M", c.M},       {"K", c.K},         {"D", c.D}, {"L", c.L},
          {"snr_db", std::isinf(c.snr_db) ? json("inf") : json(c.snr_db)},
          {"alpha", c.alpha}, {"seed", c.seed}};
}

json solver_json(const SolverConfig& s) {
  json j{{"max_iters", s.max_iters},
         {"tol", s.tol},
         {"sigma_hat_mode", to_string(s.sigma_hat_mode)},
         {"gamma_mode", to_string(s.gamma_mode)}};
  if (s.sigma_hat_mode == SigmaHatMode::Value) j["sigma_hat_sq"] = s.sigma_hat_sq_value;
  return j;
}

json methods_json(const std::vector<Method>& methods) {
  json arr = json::array();
  for (Method m : methods) arr.push_back(to_string(m));
  return arr;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json manifest(const std::string& command, const std::vector<std::string>& args, json config,
              std::uint64_t seed, const OutputSet& outputs, const fs::path& dir) {
  json files = json::array();
  for (const auto& [name, _] : outputs) files.push_back((dir / name).string());
  return {{"tool", "blindmc"},
          {"version", kVersion},
          {"command", command},
          {"argv", args},
          {"config", std::move(config)},
          {"master_seed", seed},
          {"timestamp_utc", utc_timestamp()},
          {"outputs", files}};
}

// The manifest goes first so it exists whenever any result file does.
void commit(const fs::path& dir, const json& manifest_json, const OutputSet& outputs) {
  fs::create_directories(dir);
  io::write_file_atomic(dir / "manifest.json", manifest_json.dump(2) + "\n");
  for (const auto& [name, contents] : outputs) io::write_file_atomic(dir / name, contents);
}

json record_json(const MethodRecord& r) {
  json j{{"sin_angle", r.sin_angle},        {"error_trace", r.error_trace},
         {"change_trace", r.change_trace},  {"objective", r.objective},
         {"seconds", r.seconds},            {"degenerate", r.degenerate},
         {"converged", r.converged},        {"failed", r.failed}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

int hardware_parallelism() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------------------

struct DeconvFlags {
  std::string observations, basis, out = "blindmc_out", method = "rtpm", truth;
  bool dump_matrices = false;
  SolverFlags solver;
};

int cmd_deconv(const DeconvFlags& f, const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  const Method method = parse_method(f.method);
  const SolverConfig solver = to_solver(f.solver);
  const BilinearBasis basis = io::basis_from_json(io::read_file(f.basis));
  ObservationSet obs = io::observations_from_csv(io::read_file(f.observations));

  std::optional<GroundTruth> truth;
  if (!f.truth.empty()) {
    try {
      const json t = json::parse(io::read_file(f.truth));
      truth = GroundTruth{complex_vector(t.at("gains")), complex_vector(t.at("coeffs")),
                          t.at("source_norm_sq").get<double>(), t.at("noise_sigma").get<double>()};
    } catch (const json::exception& e) {
      throw InputError(std::string("truth file: ") + e.what());
    }
    obs.noise_sigma = truth->noise_sigma;
  }
  for (const auto& w : basis.warnings()) err << "warning: " << w << "\n";
  for (const auto& w : obs.warnings(basis.support())) err << "warning: " << w << "\n";

  const EstimateReport report =
      estimate_all(obs, basis, solver, {method}, truth ? &*truth : nullptr);
  const MethodOutcome& outcome = report.outcomes.at(method);
  if (!outcome.result) {
    err << "error: " << to_string(method) << " failed: " << outcome.error << "\n";
    return kNumericalFailure;
  }
  const EstimateResult& est = *outcome.result;

  // Residual of the cross-convolution quadratic form at the unit-norm estimate.
  const GramYY gram = gram_yy(obs, basis.support());
  const double residual = est.h_hat.dot(gram.mat * est.h_hat).real();

  OutputSet outputs;
  outputs["h_hat.csv"] = io::signal_to_csv(est.h_hat);
  if (est.a_hat) outputs["a_hat.csv"] = io::signal_to_csv(*est.a_hat);
  if (est.b_hat) outputs["b_hat.csv"] = io::signal_to_csv(*est.b_hat);
  if (f.dump_matrices) {
    outputs["gram.csv"] = io::matrix_to_csv(gram.mat);
    outputs["A.csv"] = io::matrix_to_csv(build_A(gram, basis, report.sigma_hat_sq).mat);
  }
  json rep{{"method", to_string(method)},
           {"M", basis.channels()},
           {"K", basis.support()},
           {"D", basis.dim()},
           {"L", obs.length()},
           {"sigma_hat_mode", to_string(solver.sigma_hat_mode)},
           {"sigma_hat_sq", report.sigma_hat_sq},
           {"iterations", est.trace.size()},
           {"trace", est.trace},
           {"objective", est.objective},
           {"residual_quadratic_form", residual},
           {"converged", est.converged},
           {"degenerate", est.degenerate},
           {"timing",
            {{"gram_seconds", report.gram_seconds},
             {"restrict_seconds", report.restrict_seconds},
             {"init_seconds", report.init_seconds},
             {"solve_seconds", est.elapsed}}}};
  if (method == Method::Rtpm) {
    rep["gamma_mode"] = to_string(solver.gamma_mode);
    rep["gamma"] = report.gamma;
  }
  outputs["report.json"] = rep.dump(2) + "\n";

  json config{{"observations", f.observations}, {"basis", f.basis}, {"truth", f.truth},
              {"method", to_string(method)},    {"solver", solver_json(solver)}};
  commit(f.out, manifest("deconv", args, config, 0, outputs, f.out), outputs);
  out << to_string(method) << ": wrote " << outputs.size() << " files to " << f.out
      << " (residual " << residual << ", " << est.trace.size() << " iterations)\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateFlags {
  InstanceFlags instance;
  SolverFlags solver;
  std::string methods = "cc,sccc,alteig,rtpm";
  std::string out = "blindmc_out";
  bool dump = false;
};

int cmd_simulate(const SimulateFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  const InstanceConfig cfg = to_config(f.instance);
  const SolverConfig solver = to_solver(f.solver);
  const std::vector<Method> methods = parse_methods(f.methods);
  const TrialRecord record = run_trial(cfg, solver, methods);

  OutputSet outputs;
  json trial{{"seed", record.seed}, {"noise_sigma", record.noise_sigma}, {"methods", json::object()}};
  for (const auto& [m, r] : record.methods) trial["methods"][to_string(m)] = record_json(r);
  outputs["trial.json"] = trial.dump(2) + "\n";

  if (f.dump) {
    const Instance inst = random_instance(cfg);
    outputs["observations.csv"] = io::observations_to_csv(inst.observations);
    outputs["basis.json"] = io::basis_to_json(inst.basis);
    outputs["h_true.csv"] = io::signal_to_csv(inst.channels.stacked());
    outputs["truth.json"] = json{{"noise_sigma", inst.observations.noise_sigma},
                                 {"gains", complex_array(inst.channels.gains)},
                                 {"coeffs", complex_array(inst.channels.coeffs)},
                                 {"source_norm_sq", inst.source.squaredNorm()}}
                                .dump(2) +
                            "\n";
    for (const auto& [m, r] : record.methods) {
      if (r.h_hat.size() > 0) outputs["h_hat_" + to_string(m) + ".csv"] = io::signal_to_csv(r.h_hat);
    }
  }

  json config{{"instance", instance_json(cfg)}, {"solver", solver_json(solver)},
              {"methods", methods_json(methods)}, {"dump", f.dump}};
  commit(f.out, manifest("simulate", args, config, cfg.seed, outputs, f.out), outputs);

  bool any_failed = false;
  for (const auto& [m, r] : record.methods) {
    out << std::left << std::setw(8) << to_string(m);
    if (r.failed) {
      out << "FAILED " << r.error << "\n";
      any_failed = true;
    } else {
      out << "sin_angle=" << std::scientific << std::setprecision(3) << r.sin_angle
          << std::defaultfloat << " iterations=" << r.change_trace.size()
          << (r.degenerate ? " degenerate" : "") << "\n";
    }
  }
  return any_failed ? kNumericalFailure : kOk;
}

// ---------------------------------------------------------------------------

struct SweepFlags {
  InstanceFlags instance;
  SolverFlags solver;
  std::string axis = "L";
  std::string values;
  int trials = 100;
  std::string methods = "cc,sccc,alteig,rtpm";
  double percentile = 95.0;
  int parallelism = 0;
  std::string out = "blindmc_out";
};

int cmd_sweep(const SweepFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  SweepSpec spec;
  spec.base = to_config(f.instance);
  spec.axis = parse_axis(f.axis);
  spec.values = parse_values(f.values, "--values");
  spec.n_trials = f.trials;
  spec.methods = parse_methods(f.methods);
  spec.percentile_p = f.percentile;
  spec.solver = to_solver(f.solver);
  const int parallelism = f.parallelism > 0 ? f.parallelism : hardware_parallelism();

  const SweepResult result = run_sweep(spec, parallelism);
  OutputSet outputs;
  outputs["sweep.csv"] = sweep_csv(result);

  json config{{"base", instance_json(spec.base)}, {"axis", to_string(spec.axis)},
              {"values", spec.values},           {"trials", spec.n_trials},
              {"methods", methods_json(spec.methods)}, {"percentile", spec.percentile_p},
              {"solver", solver_json(spec.solver)},    {"parallelism", parallelism},
              {"seed_derivation", "derive_seed(master, axis_index, trial_index), SplitMix64 mix"}};
  commit(f.out, manifest("sweep", args, config, spec.base.seed, outputs, f.out), outputs);
  out << outputs["sweep.csv"];
  return kOk;
}

// ---------------------------------------------------------------------------

struct GridFlags {
  Index K = 64, M = 8;
  std::string snr_db = "20";
  double alpha = 0.5;
  std::uint64_t seed = 0;
  SolverFlags solver;
  std::string d_over_k, l_over_k;
  int trials = 100;
  std::string methods = "cc,sccc,alteig,rtpm";
  double percentile = 95.0;
  int parallelism = 0;
  std::string out = "blindmc_out";
};

int cmd_grid(const GridFlags& f, const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  GridSpec spec;
  spec.K = f.K;
  spec.M = f.M;
  spec.snr_db = parse_snr(f.snr_db);
  spec.alpha = f.alpha;
  spec.seed = to_config(InstanceFlags{f.M, f.K, 1, f.K, f.snr_db, f.alpha, f.seed}).seed;
  spec.d_over_k = parse_values(f.d_over_k, "--d-over-k");
  spec.l_over_k = parse_values(f.l_over_k, "--l-over-k");
  spec.n_trials = f.trials;
  spec.methods = parse_methods(f.methods);
  spec.percentile_p = f.percentile;
  spec.solver = to_solver(f.solver);
  const int parallelism = f.parallelism > 0 ? f.parallelism : hardware_parallelism();

  const GridResult result = run_grid(spec, parallelism);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  OutputSet outputs;
  outputs["grid.csv"] = grid_csv(result);

  json config{{"K", spec.K}, {"M", spec.M}, {"snr_db", f.snr_db}, {"alpha", spec.alpha},
              {"d_over_k", spec.d_over_k}, {"l_over_k", spec.l_over_k},
              {"trials", spec.n_trials},  {"methods", methods_json(spec.methods)},
              {"percentile", spec.percentile_p}, {"solver", solver_json(spec.solver)},
              {"parallelism", parallelism}, {"warnings", result.warnings}};
  commit(f.out, manifest("grid", args, config, spec.seed, outputs, f.out), outputs);
  out << outputs["grid.csv"];
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_selftest(std::ostream& out) {
  bool all = true;
  for (const auto& check : testing::run_selftest()) {
    out << (check.pass ? "PASS " : "FAIL ") << check.name << ": " << check.detail
        << " (tolerance " << check.tolerance << ")\n";
    all = all && check.pass;
  }
  out << (all ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
  return all ? kOk : kNumericalFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"blindmc: multichannel blind deconvolution under a bilinear channel model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  DeconvFlags deconv;
  auto* deconv_cmd = app.add_subcommand("deconv", "estimate channels from observation files");
  deconv_cmd->add_option("--observations", deconv.observations, "observation CSV")->required();
  deconv_cmd->add_option("--basis", deconv.basis, "basis JSON")->required();
  deconv_cmd->add_option("--out", deconv.out, "output directory")->capture_default_str();
  deconv_cmd->add_option("--method", deconv.method, "cc, sccc, alteig or rtpm")->capture_default_str();
  deconv_cmd->add_option("--truth", deconv.truth,
                         "simulation truth JSON (enables --sigma-hat exact, expected_norm)");
  deconv_cmd->add_flag("--dump-matrices", deconv.dump_matrices, "also write gram.csv and A.csv");
  add_solver_flags(deconv_cmd, deconv.solver, "zero", "sample_norm");

  SimulateFlags simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "run one seeded trial and record traces");
  add_instance_flags(sim_cmd, simulate.instance);
  add_solver_flags(sim_cmd, simulate.solver, "exact", "sample_norm");
  sim_cmd->add_option("--method", simulate.methods, "comma-separated methods")->capture_default_str();
  sim_cmd->add_option("--out", simulate.out, "output directory")->capture_default_str();
  sim_cmd->add_flag("--dump", simulate.dump, "write the instance as deconv input files");

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "percentile error along one parameter axis");
  add_instance_flags(sweep_cmd, sweep.instance);
  add_solver_flags(sweep_cmd, sweep.solver, "exact", "sample_norm");
  sweep_cmd->add_option("--axis", sweep.axis, "L, D, M, snr_db or alpha")->capture_default_str();
  sweep_cmd->add_option("--values", sweep.values, "comma-separated axis values")->required();
  sweep_cmd->add_option("--trials", sweep.trials, "trials per axis value")->capture_default_str();
  sweep_cmd->add_option("--method", sweep.methods, "comma-separated methods")->capture_default_str();
  sweep_cmd->add_option("--percentile", sweep.percentile, "reported percentile")->capture_default_str();
  sweep_cmd->add_option("--parallelism", sweep.parallelism, "worker threads (0: all cores)");
  sweep_cmd->add_option("--out", sweep.out, "output directory")->capture_default_str();

  GridFlags grid;
  auto* grid_cmd = app.add_subcommand("grid", "phase-transition grid over D/K and L/K");
  grid_cmd->add_option("--K", grid.K, "impulse response length")->capture_default_str();
  grid_cmd->add_option("--M", grid.M, "number of channels")->capture_default_str();
  grid_cmd->add_option("--snr-db", grid.snr_db, "SNR in dB (inf for noiseless)")->capture_default_str();
  grid_cmd->add_option("--alpha", grid.alpha, "gain spread")->capture_default_str();
  grid_cmd->add_option("--seed", grid.seed, "master seed (BLINDMC_SEED overrides)")->capture_default_str();
  add_solver_flags(grid_cmd, grid.solver, "exact", "sample_norm");
  grid_cmd->add_option("--d-over-k", grid.d_over_k, "comma-separated D/K values")->required();
  grid_cmd->add_option("--l-over-k", grid.l_over_k, "comma-separated L/K values")->required();
  grid_cmd->add_option("--trials", grid.trials, "trials per cell")->capture_default_str();
  grid_cmd->add_option("--method", grid.methods, "comma-separated methods")->capture_default_str();
  grid_cmd->add_option("--percentile", grid.percentile, "reported percentile")->capture_default_str();
  grid_cmd->add_option("--parallelism", grid.parallelism, "worker threads (0: all cores)");
  grid_cmd->add_option("--out", grid.out, "output directory")->capture_default_str();

  auto* selftest_cmd = app.add_subcommand("selftest", "run the reference-oracle checks");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* target = &app;
    for (auto* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return kInputError;
  }

  try {
    if (deconv_cmd->parsed()) return cmd_deconv(deconv, args, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(simulate, args, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, args, out);
    if (grid_cmd->parsed()) return cmd_grid(grid, args, out, err);
    if (selftest_cmd->parsed()) return cmd_selftest(out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kInputError;
}

}  // namespace blindmc::cli
