#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mkv/solver.hpp"
#include "mkv/spectral.hpp"

using namespace mkv;

namespace {

ScalarField normal_density(const GridSpec& g, double var = 1.0) {
  const Eigen::ArrayXXd xs = g.coordinates();
  ScalarField f(g, (-0.5 * xs.square().rowwise().sum() / var).exp());
  f.values /= f.integral();
  return f;
}

SolverConfig burgers_config(int n, double horizon, int mesh) {
  SolverConfig cfg;
  const GridSpec g(1, 8.0, n);
  cfg.mu0 = normal_density(g);
  cfg.kernel.kind = KernelKind::BurgersDirac;
  cfg.noise = StableParams::isotropic(2.0);
  cfg.indices.d = 1;
  cfg.indices.alpha = 2.0;
  cfg.indices.beta = 0.0;
  cfg.indices.p = 1.0;
  cfg.indices.p0 = 2.0;
  cfg.horizon_end = horizon;
  cfg.mesh_intervals = mesh;
  cfg.norm_nodes = 32;
  return cfg;
}

double l1(const ScalarField& a, const ScalarField& b) {
  return lebesgue_norm(a.values - b.values, 1.0, a.grid.cell_volume());
}

}  // namespace

TEST_CASE("graded time mesh") {
  SolverConfig cfg = burgers_config(64, 1.0, 8);
  cfg.t_start = 0.5;
  cfg.horizon_end = 1.5;
  cfg.grading = 2.0;
  const auto m = time_mesh(cfg);
  REQUIRE(m.size() == 9);
  CHECK(m.front() == 0.5);
  CHECK(m.back() == 1.5);
  CHECK(m[4] == doctest::Approx(0.75));
}

TEST_CASE("drift field") {
  GridSpec g(1, 8.0, 512);
  KernelSpec spec;
  spec.kind = KernelKind::BurgersDirac;
  const Kernel k = build_kernel(spec, g);
  const ScalarField rho = normal_density(g);
  const VectorField B = drift_field(k.b, rho);
  const ScalarField smeared = normal_density(g, 1.0 + k.epsilon * k.epsilon);
  CHECK((B.values.col(0) - 0.5 * smeared.values).abs().maxCoeff() < 1e-8);
  CHECK(drift_field(VectorField(g), rho).values.abs().maxCoeff() == 0.0);
  const ScalarField spike = normal_density(g, 0.01);
  const VectorField Bs = drift_field(k.b, spike);
  const VectorField bb = mollify_kernel(k.b, 0.1);
  CHECK((Bs.values - bb.values).abs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(drift_field(k.b, normal_density(GridSpec(1, 8.0, 256))), ParameterError);
}

TEST_CASE("zero kernel reproduces the free semigroup") {
  SolverConfig cfg = burgers_config(256, 1.0, 8);
  cfg.kernel.kind = KernelKind::Zero;
  cfg.indices.p = std::numeric_limits<double>::infinity();
  const GridSpec& g = cfg.mu0.grid;
  cfg.noise = StableParams::isotropic(1.5);
  cfg.indices.alpha = 1.5;
  cfg.mu0 = stable_density(cfg.noise, 1.0, g);
  cfg.mu0.values /= cfg.mu0.integral();
  const Trajectory free = free_evolution(cfg);
  const Trajectory step = duhamel_step(free, cfg);
  for (std::size_t j = 0; j < free.size(); ++j) {
    CHECK((step.densities[j].values - free.densities[j].values).abs().maxCoeff() < 1e-14);
    const ScalarField exact = stable_density(cfg.noise, 1.0 + free.stamps[j], g);
    CHECK((free.densities[j].values - exact.values / exact.integral()).abs().maxCoeff() < 1e-6);
  }
  const MildSolution sol = solve_mild(cfg);
  CHECK(sol.trajectory.status == RunStatus::Converged);
  CHECK(sol.history.size() <= 2);
  CHECK((sol.trajectory.densities.back().values - free.densities.back().values).abs().maxCoeff() < 1e-12);
}

TEST_CASE("one burgers Picard step moves toward the fixed point") {
  SolverConfig cfg = burgers_config(256, 0.1, 16);
  const MildSolution sol = solve_mild(cfg);
  REQUIRE(sol.trajectory.status == RunStatus::Converged);
  const Trajectory rho0 = free_evolution(cfg);
  const Trajectory rho1 = duhamel_step(rho0, cfg);
  const ScalarField& target = sol.trajectory.densities.back();
  CHECK(l1(rho1.densities.back(), target) < 0.1 * l1(rho0.densities.back(), target));
}

TEST_CASE("burgers mild solution against the Cole-Hopf reference") {
  SolverConfig cfg = burgers_config(256, 0.5, 32);
  const MildSolution sol = solve_mild(cfg);
  REQUIRE(sol.trajectory.status == RunStatus::Converged);
  for (const auto& dg : sol.trajectory.diagnostics) {
    CHECK(std::abs(dg.mass - 1.0) < 1e-3);
    CHECK(dg.picard_iters > 0);
    CHECK(dg.drift_sup > 0.0);
  }
  const ScalarField ref = cole_hopf_reference(cfg.mu0, 0.5);
  CHECK(l1(sol.trajectory.densities.back(), ref) < 1e-2);
  for (double r : duhamel_residual(sol, cfg)) CHECK(r < cfg.picard_tol);
  CHECK(sol.theta == doctest::Approx(sol.report.theta));
  CHECK(sol.norm_space.ell == std::numeric_limits<double>::infinity());
  CHECK(sol.norm_space.m == 1.0);
}

TEST_CASE("failing conditions refuse to run unless forced") {
  SolverConfig cfg = burgers_config(128, 0.2, 8);
  cfg.indices.p0 = 1.0;
  cfg.indices.beta0 = 0.0;
  CHECK_THROWS_AS(solve_mild(cfg), ConditionError);
  cfg.force = true;
  const MildSolution sol = solve_mild(cfg);
  CHECK(sol.trajectory.status == RunStatus::Converged);
  CHECK_FALSE(sol.report.weak());
}

TEST_CASE("blowup threshold stops the run at the first offending stamp") {
  SolverConfig cfg = burgers_config(128, 0.2, 8);
  cfg.blowup_threshold = 0.5 * cfg.mu0.values.maxCoeff();
  const MildSolution sol = solve_mild(cfg);
  CHECK(sol.trajectory.status == RunStatus::Blowup);
  CHECK(sol.trajectory.blowup_time == doctest::Approx(time_mesh(cfg)[1]));
  CHECK(sol.trajectory.size() == 1);
  CHECK(cfg.effective_blowup_threshold() == cfg.blowup_threshold);
  cfg.blowup_threshold = 0.0;
  CHECK(cfg.effective_blowup_threshold() == doctest::Approx(1e3 * cfg.mu0.values.maxCoeff()));
}

TEST_CASE("solver configuration errors") {
  SolverConfig cfg = burgers_config(128, 0.2, 8);
  cfg.mesh_intervals = 4;
  CHECK_THROWS_AS(solve_mild(cfg), ParameterError);
  cfg = burgers_config(128, 0.2, 8);
  cfg.mu0.values *= 1.1;
  CHECK_THROWS_AS(solve_mild(cfg), ParameterError);
  cfg = burgers_config(128, 0.2, 8);
  cfg.horizon_end = 0.0;
  CHECK_THROWS_AS(solve_mild(cfg), ParameterError);
  cfg = burgers_config(128, 0.2, 8);
  cfg.indices.alpha = 1.5;
  CHECK_THROWS_AS(solve_mild(cfg), ParameterError);
}

TEST_CASE("picard relaxation and windowing keep long horizons convergent") {
  SolverConfig cfg = burgers_config(256, 2.0, 16);
  const MildSolution sol = solve_mild(cfg);
  CHECK(sol.trajectory.status == RunStatus::Converged);
  CHECK(sol.windows >= 1);
  CHECK(sol.trajectory.stamps.back() == doctest::Approx(2.0));
}

TEST_CASE("drift power integral") {
  SolverConfig cfg = burgers_config(256, 0.5, 16);
  const MildSolution sol = solve_mild(cfg);
  const double i1 = drift_power_integral(sol, 1.0);
  CHECK(i1 > 0.0);
  CHECK(i1 < 0.5 * sol.initial_drift_sup * 1.0001);
  CHECK_THROWS_AS(drift_power_integral(sol, 0.0), ParameterError);
}

TEST_CASE("epsilon stability of an already smooth kernel") {
  SolverConfig cfg = burgers_config(512, 0.2, 8);
  const GridSpec& g = cfg.mu0.grid;
  const Eigen::ArrayXXd xs = g.coordinates();
  VectorField b(g);
  b.values.col(0) = 0.05 * (-0.5 * xs.col(0).square() / 4.0).exp();
  cfg.kernel.kind = KernelKind::Custom;
  cfg.kernel.custom = b;
  const double h = g.spacing();
  const auto rows = epsilon_stability(cfg, {8 * h, 4 * h, 2 * h});
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK_FALSE(r.failed);
    CHECK(r.l1 < 1e-4);
    CHECK(r.weighted < 1e-4);
  }
  CHECK_THROWS_AS(epsilon_stability(cfg, {2 * h, 4 * h, 8 * h}), ParameterError);
  CHECK_THROWS_AS(epsilon_stability(cfg, {4 * h, 2 * h}), ParameterError);
}

TEST_CASE("trajectory distance uses common stamps only") {
  SolverConfig cfg = burgers_config(128, 1.0, 8);
  cfg.kernel.kind = KernelKind::Zero;
  const Trajectory a = free_evolution(cfg);
  cfg.mesh_intervals = 16;
  const Trajectory b = free_evolution(cfg);
  const auto [w, d] = trajectory_distance(a, b, {0.0, 2.0, 1.0}, 0.5, 16);
  CHECK(w < 1e-12);
  CHECK(d < 1e-12);
}
