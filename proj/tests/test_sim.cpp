#include <doctest.h>

#include "blindmc/sim.hpp"
#include "helpers.hpp"

using namespace blindmc;

namespace {

SolverConfig exact_solver() {
  SolverConfig s;
  s.sigma_hat_mode = SigmaHatMode::Exact;
  s.gamma_mode = GammaMode::SampleNorm;
  return s;
}

SweepSpec small_sweep() {
  SweepSpec spec;
  spec.base = {4, 16, 4, 64, 20.0, 0.5, 7};
  spec.axis = SweepAxis::L;
  spec.values = {64, 128};
  spec.n_trials = 3;
  spec.solver = exact_solver();
  return spec;
}

}  // namespace

TEST_CASE("run_trial") {
  SUBCASE("noiseless trial recovers with every method") {
    const TrialRecord rec = run_trial({4, 16, 4, 64, INFINITY, 0.5, 3}, SolverConfig{}, all_methods());
    CHECK(rec.noise_sigma == 0.0);
    for (const auto& [m, r] : rec.methods) {
      CAPTURE(to_string(m));
      CHECK_FALSE(r.failed);
      CHECK(r.sin_angle <= 1e-6);
    }
    CHECK(rec.methods.at(Method::AltEig).error_trace.size() ==
          rec.methods.at(Method::AltEig).change_trace.size());
  }
  SUBCASE("same seed twice gives an identical record") {
    const InstanceConfig cfg{4, 16, 4, 64, 15.0, 0.5, 9};
    const TrialRecord a = run_trial(cfg, exact_solver(), all_methods());
    const TrialRecord b = run_trial(cfg, exact_solver(), all_methods());
    for (Method m : all_methods()) {
      CHECK(a.methods.at(m).sin_angle == b.methods.at(m).sin_angle);
      CHECK(a.methods.at(m).h_hat == b.methods.at(m).h_hat);
      CHECK(a.methods.at(m).error_trace == b.methods.at(m).error_trace);
    }
  }
  SUBCASE("no methods") {
    CHECK_THROWS_AS(run_trial({4, 16, 4, 64, 15.0, 0.5, 9}, SolverConfig{}, {}), InputError);
  }
}

TEST_CASE("axis handling") {
  for (SweepAxis a : {SweepAxis::L, SweepAxis::D, SweepAxis::M, SweepAxis::SnrDb, SweepAxis::Alpha}) {
    CHECK(parse_axis(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_axis("K"), InputError);
  const InstanceConfig base{4, 16, 4, 64, 20.0, 0.5, 0};
  CHECK(with_axis_value(base, SweepAxis::L, 128).L == 128);
  CHECK(with_axis_value(base, SweepAxis::SnrDb, 5.5).snr_db == 5.5);
  CHECK_THROWS_AS(with_axis_value(base, SweepAxis::D, 2.5), InputError);
  CHECK_THROWS_AS(with_axis_value(base, SweepAxis::D, 32), InputError);
}

TEST_CASE("trial seeds are distinct across points and trials") {
  CHECK(trial_seed(1, 0, 0) != trial_seed(1, 0, 1));
  CHECK(trial_seed(1, 0, 1) != trial_seed(1, 1, 0));
  CHECK(trial_seed(1, 3, 4) == derive_seed(1, 3, 4));
}

TEST_CASE("run_sweep") {
  SUBCASE("one trial at one point reports that trial") {
    SweepSpec spec = small_sweep();
    spec.values = {64};
    spec.n_trials = 1;
    const SweepResult res = run_sweep(spec, 1);
    InstanceConfig cfg = spec.base;
    cfg.seed = trial_seed(spec.base.seed, 0, 0);
    const TrialRecord direct = run_trial(cfg, spec.solver, spec.methods);
    REQUIRE(res.rows.size() == all_methods().size());
    for (const auto& row : res.rows) CHECK(row.percentile_error == direct.methods.at(row.method).sin_angle);
  }
  SUBCASE("parallelism does not change the output") {
    const SweepSpec spec = small_sweep();
    CHECK(sweep_csv(run_sweep(spec, 1)) == sweep_csv(run_sweep(spec, 8)));
  }
  SUBCASE("flagged records") {
    MethodRecord rec;
    rec.sin_angle = 0.01;
    CHECK_FALSE(rec.flagged());
    rec.degenerate = true;
    CHECK(rec.flagged());
    rec.degenerate = false;
    rec.failed = true;
    CHECK(rec.flagged());
  }
  SUBCASE("invalid specs") {
    SweepSpec spec = small_sweep();
    spec.values.clear();
    CHECK_THROWS_AS(run_sweep(spec, 1), InputError);
    spec = small_sweep();
    spec.values = {8};
    CHECK_THROWS_AS(run_sweep(spec, 1), InputError);
    spec = small_sweep();
    spec.percentile_p = 120;
    CHECK_THROWS_AS(run_sweep(spec, 1), InputError);
  }
  SUBCASE("csv layout") {
    const std::string csv = sweep_csv(run_sweep(small_sweep(), 1));
    CHECK(csv.rfind("axis_value,method,percentile_error,n_failed\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 4);
  }
}

TEST_CASE("grid") {
  GridSpec spec;
  spec.K = 16;
  spec.M = 4;
  spec.d_over_k = {0.25};
  spec.l_over_k = {4.0};
  spec.n_trials = 3;
  spec.solver = exact_solver();
  spec.seed = 5;

  SUBCASE("a 1x1 grid reduces to a sweep point") {
    const GridResult g = run_grid(spec, 1);
    SweepSpec sw;
    sw.base = {4, 16, 4, 64, 20.0, 0.5, 5};
    sw.values = {64};
    sw.n_trials = 3;
    sw.solver = spec.solver;
    const SweepResult s = run_sweep(sw, 1);
    REQUIRE(g.cells.size() == s.rows.size());
    for (size_t i = 0; i < g.cells.size(); ++i) {
      CHECK(g.cells[i].method == s.rows[i].method);
      CHECK(g.cells[i].log10_error == std::log10(s.rows[i].percentile_error));
    }
    CHECK(g.warnings.empty());
  }
  SUBCASE("non-integral dimensions are clamped with warnings") {
    std::vector<std::string> warnings;
    auto [d, l] = grid_dims(spec, 0.3, 4.1, &warnings);
    CHECK(d == 4);
    CHECK(l == 65);
    CHECK(warnings.size() == 2);
    warnings.clear();
    std::tie(d, l) = grid_dims(spec, 0.01, 0.5, &warnings);
    CHECK(d == 1);
    CHECK(l == 16);
    CHECK(warnings.size() >= 2);
    std::tie(d, l) = grid_dims(spec, 2.0, 4.0, nullptr);
    CHECK(d == 16);
  }
  SUBCASE("matrix view and csv") {
    spec.d_over_k = {0.125, 0.25};
    spec.l_over_k = {4.0, 8.0};
    spec.n_trials = 1;
    const GridResult g = run_grid(spec, 2);
    const Eigen::MatrixXd mat = g.matrix(Method::Rtpm, 2, 2);
    CHECK(mat.allFinite());
    const std::string csv = grid_csv(g);
    CHECK(csv.rfind("d_over_k,l_over_k,method,log10_error\n", 0) == 0);
    CHECK(csv == grid_csv(run_grid(spec, 1)));
  }
  SUBCASE("noiseless exact recovery stays finite on the log scale") {
    spec.snr_db = INFINITY;
    spec.n_trials = 1;
    spec.solver.sigma_hat_mode = SigmaHatMode::Zero;
    spec.solver.gamma_mode = GammaMode::SampleNorm;
    for (const auto& c : run_grid(spec, 1).cells) {
      CHECK(std::isfinite(c.log10_error));
      CHECK(c.log10_error < -4);
    }
  }
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(64) == "64");
}
