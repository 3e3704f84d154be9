#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mkv/particles.hpp"

using namespace mkv;

namespace {

ScalarField normal_density(const GridSpec& g, double var = 1.0) {
  const Eigen::ArrayXXd xs = g.coordinates();
  ScalarField f(g, (-0.5 * xs.square().rowwise().sum() / var).exp());
  f.values /= f.integral();
  return f;
}

ParticleConfig base_config(const GridSpec& g) {
  ParticleConfig cfg;
  cfg.mu0 = normal_density(g, 0.25);
  cfg.n_particles = 2000;
  cfg.dt = 0.02;
  cfg.horizon = 0.2;
  return cfg;
}

}  // namespace

TEST_CASE("child seeds separate purposes and indices") {
  CHECK(child_seed(1, "initial") == child_seed(1, "initial"));
  CHECK(child_seed(1, "initial") != child_seed(1, "increments"));
  CHECK(child_seed(1, "increments", 0) != child_seed(1, "increments", 1));
  CHECK(child_seed(1, "initial") != child_seed(2, "initial"));
}

TEST_CASE("particles at the origin give a mollified Dirac") {
  GridSpec g(1, 4.0, 256);
  const Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(500, 1);
  const double bw = 0.2;
  const ScalarField f = empirical_density(pos, bw, g);
  CHECK(std::abs(f.integral() - 1.0) < 1e-6);
  const double peak = 1.0 / (std::sqrt(2.0 * M_PI) * bw);
  CHECK(f.values(128) == doctest::Approx(peak).epsilon(1e-6));
  CHECK(f.values(128 + 16) == doctest::Approx(peak * std::exp(-0.5 * std::pow(16 * g.spacing() / bw, 2))).epsilon(1e-6));
  CHECK_THROWS_AS(empirical_density(pos, 0.5 * g.spacing(), g), ParameterError);
}

TEST_CASE("uniform particles give a flat density") {
  GridSpec g(2, 2.0, 32);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd pos(200000, 2);
  for (Eigen::Index i = 0; i < pos.size(); ++i) pos.data()[i] = u(rng);
  const ScalarField f = empirical_density(pos, 0.3, g);
  CHECK(std::abs(f.integral() - 1.0) < 1e-6);
  CHECK((f.values - 1.0 / 16.0).abs().maxCoeff() < 0.1 / 16.0);
}

TEST_CASE("KDE self-distance shrinks with n") {
  GridSpec g(1, 6.0, 256);
  const ScalarField mu = normal_density(g);
  auto self_distance = [&](Eigen::Index n) {
    double total = 0.0;
    for (std::uint64_t s = 0; s < 4; ++s) {
      const Eigen::MatrixXd a = sample_initial(mu, n, 2 * s + 1);
      const Eigen::MatrixXd b = sample_initial(mu, n, 2 * s + 2);
      const double bw = silverman_bandwidth(a, g);
      total += lebesgue_norm(empirical_density(a, bw, g).values - empirical_density(b, bw, g).values, 1.0, g.cell_volume());
    }
    return total / 4.0;
  };
  const double coarse = self_distance(1000);
  const double fine = self_distance(16000);
  CHECK(std::log2(coarse / fine) / 4.0 >= 0.3);
}

TEST_CASE("field comparison") {
  GridSpec g(1, 4.0, 64);
  const ScalarField f = normal_density(g);
  const FieldDistance same = compare_to_pde(f, f);
  CHECK(same.l1 == 0.0);
  CHECK(same.sup == 0.0);
  ScalarField step(g), shifted(g);
  for (int i = 0; i < 64; ++i) {
    step.values(i) = (i >= 20 && i < 40) ? 1.0 : 0.0;
    shifted.values(i) = (i >= 21 && i < 41) ? 1.0 : 0.0;
  }
  // total variation 2, so the one-cell shift costs h * 2
  CHECK(compare_to_pde(step, shifted).l1 == doctest::Approx(2.0 * g.spacing()));
  CHECK_THROWS_AS(compare_to_pde(f, normal_density(GridSpec(1, 4.0, 128))), ParameterError);
}

TEST_CASE("wrapping onto the torus") {
  GridSpec g(1, 2.0, 16);
  Eigen::MatrixXd x(4, 1);
  x << 2.5, -2.5, 2.0, -6.1;
  wrap_positions(x, g);
  CHECK(x(0) == doctest::Approx(-1.5));
  CHECK(x(1) == doctest::Approx(1.5));
  CHECK(x(2) == doctest::Approx(-2.0));
  CHECK(x(3) == doctest::Approx(1.9));
}

TEST_CASE("brownian particles spread at rate 2 c dt") {
  GridSpec g(1, 16.0, 256);
  ParticleConfig cfg;
  ScalarField mu(g);
  mu.values(128) = 1.0 / g.spacing();
  cfg.mu0 = mu;
  cfg.n_particles = 100000;
  cfg.dt = 0.01;
  cfg.horizon = 0.1;
  cfg.snapshots = 10;
  const ParticleRun run = simulate(cfg);
  REQUIRE(run.snapshots.size() == 10);
  const double var0 = g.spacing() * g.spacing() / 12.0;
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const Eigen::VectorXd x = run.snapshots[k].positions.col(0);
    const double var = (x.array() - x.mean()).square().mean();
    const double target = var0 + 2.0 * 0.5 * cfg.dt * (k + 1);
    CHECK(std::abs(var - target) < 3.0 * target * std::sqrt(2.0 / cfg.n_particles));
    CHECK(std::abs(run.snapshots[k].density.integral() - 1.0) < 1e-6);
  }
}

TEST_CASE("simulation is deterministic in the seed") {
  GridSpec g(1, 8.0, 256);
  ParticleConfig cfg = base_config(g);
  cfg.kernel.kind = KernelKind::BurgersDirac;
  const ParticleRun a = simulate(cfg);
  const ParticleRun b = simulate(cfg);
  CHECK((a.snapshots.back().positions.array() == b.snapshots.back().positions.array()).all());
  cfg.seed = 2;
  const ParticleRun c = simulate(cfg);
  CHECK((a.snapshots.back().positions.array() != c.snapshots.back().positions.array()).any());
}

TEST_CASE("permuted runs share the empirical density") {
  GridSpec g(2, 4.0, 64);
  ParticleConfig cfg = base_config(g);
  cfg.n_particles = 500;
  cfg.kernel.kind = KernelKind::BiotSavart2D;
  cfg.kernel.radius = 1.5;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(cfg.n_particles));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  const ParticleRun a = simulate(cfg);
  const ParticleRun b = simulate(cfg, &perm);
  CHECK((a.snapshots.back().density.values - b.snapshots.back().density.values).abs().maxCoeff() < 1e-9);
}

TEST_CASE("odd kernels conserve the centre of mass up to the noise") {
  GridSpec g(2, 4.0, 64);
  ParticleConfig cfg = base_config(g);
  cfg.n_particles = 400;
  cfg.kernel.kind = KernelKind::KellerSegel;
  cfg.kernel.radius = 1.5;
  cfg.kernel.chi = 5.0;
  const ParticleRun ks = simulate(cfg);
  cfg.kernel.kind = KernelKind::Zero;
  const ParticleRun free = simulate(cfg);
  const Eigen::RowVectorXd ca = ks.snapshots.back().positions.colwise().mean();
  const Eigen::RowVectorXd cb = free.snapshots.back().positions.colwise().mean();
  CHECK((ca - cb).norm() < 1e-10);
}

TEST_CASE("binned drift agrees with the direct sum") {
  GridSpec g(1, 8.0, 512);
  KernelSpec spec;
  spec.kind = KernelKind::BurgersDirac;
  const Kernel k = build_kernel(spec, g);
  const Eigen::MatrixXd pos = sample_initial(normal_density(g), 3000, 9);
  const Eigen::MatrixXd direct = empirical_drift(k.b, pos, 10000);
  const Eigen::MatrixXd binned = empirical_drift(k.b, pos, 100);
  CHECK((direct - binned).cwiseAbs().maxCoeff() < 0.02 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("particle configuration errors") {
  GridSpec g(1, 8.0, 256);
  ParticleConfig cfg = base_config(g);
  cfg.n_particles = 50;
  CHECK_THROWS_AS(simulate(cfg), ParameterError);
  cfg = base_config(g);
  cfg.dt = 0.1;
  CHECK_THROWS_AS(simulate(cfg), ParameterError);
  cfg = base_config(g);
  cfg.n_particles = ParticleConfig::kMaxParticles + 1;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = base_config(g);
  std::vector<Eigen::Index> perm(3);
  CHECK_THROWS_AS(simulate(cfg, &perm), ParameterError);
}
