#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "mkv/spectral.hpp"
#include "mkv/stable_noise.hpp"

using namespace mkv;

namespace {

Eigen::ArrayXd gaussian(const GridSpec& g, double var) {
  const Eigen::ArrayXXd xs = g.coordinates();
  return (-0.5 * xs.col(0).square() / var).exp() / std::sqrt(2.0 * std::numbers::pi * var);
}

std::vector<StableAtom> axis_atoms() {
  std::vector<StableAtom> atoms;
  for (int a = 0; a < 2; ++a)
    for (double s : {1.0, -1.0}) {
      StableAtom at;
      at.direction = Eigen::Vector2d::Zero();
      at.direction(a) = s;
      at.weight = 0.5;
      atoms.push_back(at);
    }
  return atoms;
}

}  // namespace

TEST_CASE("symbol examples") {
  Eigen::Vector2d e1(1.0, 0.0);
  CHECK(stable_symbol(StableParams::isotropic(2.0), e1) == doctest::Approx(0.5));
  const auto atoms = StableParams::atoms(1.5, axis_atoms());
  CHECK(stable_symbol(atoms, e1) == doctest::Approx(0.5));
  CHECK(stable_symbol(atoms, Eigen::Vector2d::Zero()) == 0.0);
  CHECK(stable_symbol(StableParams::isotropic(1.3), Eigen::Vector2d::Zero()) == 0.0);
  Eigen::Vector2d xi(0.3, -1.7);
  CHECK(stable_symbol(atoms, xi) == doctest::Approx(stable_symbol(atoms, Eigen::Vector2d(-xi))));
  CHECK(stable_symbol(StableParams::isotropic(1.5, 1.0), xi) == doctest::Approx(std::pow(xi.norm(), 1.5)));
}

TEST_CASE("cylindrical noise equals the axis atoms") {
  const auto cyl = StableParams::cylindrical(1.5, 2);
  const auto atoms = StableParams::atoms(1.5, axis_atoms());
  Eigen::Vector2d xi(0.7, 2.1);
  CHECK(stable_symbol(cyl, xi) == doctest::Approx(stable_symbol(atoms, xi)));
  CHECK(cyl.dimension() == 2);
}

TEST_CASE("invalid stable parameters are rejected") {
  CHECK_THROWS_AS(StableParams::isotropic(0.8), ParameterError);
  CHECK_THROWS_AS(StableParams::isotropic(2.1), ParameterError);
  CHECK_THROWS_AS(StableParams::isotropic(1.5, 0.0), ParameterError);
  auto atoms = axis_atoms();
  atoms.pop_back();
  CHECK_THROWS_AS(StableParams::atoms(1.5, atoms), ParameterError);
  std::vector<StableAtom> line(2);
  line[0].direction = Eigen::Vector2d(1.0, 0.0);
  line[1].direction = Eigen::Vector2d(-1.0, 0.0);
  line[0].weight = line[1].weight = 1.0;
  CHECK_THROWS_AS(StableParams::atoms(1.5, line), ParameterError);
}

TEST_CASE("ellipticity constant bounds the symbol") {
  CHECK(StableParams::isotropic(1.7).ellipticity(2) == doctest::Approx(1.0));
  const auto cyl = StableParams::cylindrical(1.5, 2);
  const double kappa = cyl.ellipticity(2);
  CHECK(kappa > 1.0);
  for (double th = 0.0; th < 6.28; th += 0.1) {
    Eigen::Vector2d l(std::cos(th), std::sin(th));
    const double r = stable_symbol(cyl, l) / cyl.diffusivity();
    CHECK(r >= 1.0 / kappa - 1e-6);
    CHECK(r <= kappa + 1e-6);
  }
}

TEST_CASE("alpha = 2 density is the standard Gaussian") {
  GridSpec g(1, 8.0, 256);
  const ScalarField p = stable_density(StableParams::isotropic(2.0), 1.0, g);
  CHECK((p.values - gaussian(g, 1.0)).abs().maxCoeff() < 1e-8);
  CHECK(std::abs(p.integral() - 1.0) < 1e-6);
}

TEST_CASE("stable density is self-similar at alpha = 1.5") {
  const auto params = StableParams::isotropic(1.5);
  GridSpec g1(1, 32.0, 4096);
  const ScalarField p1 = stable_density(params, 1.0, g1);
  for (double t : {0.5, 2.0}) {
    const double s = std::pow(t, 1.0 / 1.5);
    GridSpec gt(1, 32.0 * s, 4096);  // p_t on the dilated grid sits on the same nodes as p_1
    const ScalarField pt = stable_density(params, t, gt);
    CHECK((pt.values * s - p1.values).abs().maxCoeff() < 1e-6);
    CHECK(std::abs(pt.integral() - 1.0) < 1e-6);
    CHECK(pt.values.minCoeff() > -1e-6);
  }
}

TEST_CASE("semigroup property on the grid") {
  const auto params = StableParams::isotropic(1.5);
  GridSpec g(1, 16.0, 1024);
  const ScalarField a = stable_density(params, 0.4, g);
  const ScalarField b = stable_density(params, 0.7, g);
  const ScalarField c = stable_density(params, 1.1, g);
  CHECK((convolve(a, b) - c.values).abs().maxCoeff() < 1e-6);
}

TEST_CASE("under-resolved densities name the minimal N") {
  GridSpec g(1, 8.0, 16);
  try {
    stable_density(StableParams::isotropic(2.0), 0.01, g);
    FAIL("expected a resolution error");
  } catch (const ResolutionError& e) {
    CHECK(e.minimal_points > 16);
    GridSpec fine(1, 8.0, e.minimal_points);
    CHECK_NOTHROW(stable_density(StableParams::isotropic(2.0), 0.01, fine));
  }
}

TEST_CASE("density gradient") {
  GridSpec g(1, 8.0, 256);
  const VectorField gr = stable_density_gradient(StableParams::isotropic(2.0), 1.0, g);
  const Eigen::ArrayXXd xs = g.coordinates();
  const Eigen::ArrayXd exact = -xs.col(0) * gaussian(g, 1.0);
  CHECK((gr.values.col(0) - exact).abs().maxCoeff() < 1e-7);
  CHECK(std::abs(gr.values.col(0).sum() * g.cell_volume()) < 1e-8);
  for (int i = 1; i < 128; ++i) CHECK(gr.values(128 + i, 0) == doctest::Approx(-gr.values(128 - i, 0)).epsilon(1e-12));

  GridSpec g2(2, 6.0, 64);
  const VectorField g2r = stable_density_gradient(StableParams::isotropic(1.6), 0.8, g2);
  for (int c = 0; c < 2; ++c) CHECK(std::abs(g2r.values.col(c).sum() * g2.cell_volume()) < 1e-8);
}

TEST_CASE("gaussian increments have variance 2 c dt") {
  const Eigen::Index n = 100000;
  const double dt = 0.3;
  const Eigen::MatrixXd x = sample_increments(StableParams::isotropic(2.0), 2, dt, n, 7);
  for (int a = 0; a < 2; ++a) {
    const double var = x.col(a).squaredNorm() / n;
    const double target = 2.0 * 0.5 * dt;
    CHECK(std::abs(var - target) < 3.0 * target * std::sqrt(2.0 / n));
  }
}

TEST_CASE("increments are deterministic in the seed") {
  const auto params = StableParams::isotropic(1.5);
  const Eigen::MatrixXd a = sample_increments(params, 2, 0.1, 1000, 42);
  const Eigen::MatrixXd b = sample_increments(params, 2, 0.1, 1000, 42);
  const Eigen::MatrixXd c = sample_increments(params, 2, 0.1, 1000, 43);
  CHECK((a.array() == b.array()).all());
  CHECK((a.array() != c.array()).any());
}

TEST_CASE("empirical characteristic function matches exp(-dt psi)") {
  const Eigen::Index n = 100000;
  const double dt = 0.5;
  for (const auto& params : {StableParams::isotropic(1.5), StableParams::cylindrical(1.5, 2)}) {
    const Eigen::MatrixXd x = sample_increments(params, 2, dt, n, 11);
    for (const Eigen::Vector2d& xi : {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.6, 0.8)}) {
      const Eigen::ArrayXd c = (x * xi).array().cos();
      const double mean = c.mean();
      const double se = std::sqrt((c - mean).square().sum() / (n - 1) / n);
      CHECK(std::abs(mean - std::exp(-dt * stable_symbol(params, xi))) < 3.0 * se);
    }
  }
}
