#include "mkv/stable_noise.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mkv/spectral.hpp"

namespace mkv {

namespace {

constexpr double kDegenerate = 1e-12;

std::vector<Eigen::VectorXd> unit_directions(int d) {
  std::vector<Eigen::VectorXd> dirs;
  if (d == 1) {
    dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
  } else if (d == 2) {
    constexpr int k = 3600;
    for (int i = 0; i < k; ++i) {
      const double th = std::numbers::pi * i / k;
      Eigen::VectorXd v(2);
      v << std::cos(th), std::sin(th);
      dirs.push_back(v);
    }
  } else {
    // Fibonacci lattice on the sphere
    constexpr int k = 8000;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < k; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / k;
      const double r = std::sqrt(1.0 - z * z);
      Eigen::VectorXd v(3);
      v << r * std::cos(golden * i), r * std::sin(golden * i), z;
      dirs.push_back(v);
    }
  }
  return dirs;
}

double atom_sum(const std::vector<StableAtom>& atoms, double alpha, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight * std::pow(std::abs(a.direction.dot(xi)), alpha);
  return s;
}

}  // namespace

void StableParams::check_alpha() const {
  if (!(alpha_ > 1.0 && alpha_ <= 2.0)) throw ParameterError("alpha must lie in (1, 2]");
  if (!(diffusivity_ > 0.0) || !std::isfinite(diffusivity_)) throw ParameterError("diffusivity must be > 0");
}

StableParams StableParams::isotropic(double alpha, double diffusivity) {
  StableParams p;
  p.alpha_ = alpha;
  p.diffusivity_ = diffusivity;
  p.check_alpha();
  return p;
}

StableParams StableParams::cylindrical(double alpha, int dimension, double diffusivity) {
  if (dimension < 1 || dimension > 3) throw ParameterError("cylindrical noise needs dimension 1, 2 or 3");
  std::vector<StableAtom> atoms;
  for (int k = 0; k < dimension; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dimension);
    e(k) = 1.0;
    atoms.push_back({e, 0.5});
    atoms.push_back({-e, 0.5});
  }
  StableParams p = StableParams::atoms(alpha, std::move(atoms), diffusivity);
  p.measure_ = SpectralMeasure::Cylindrical;
  return p;
}

StableParams StableParams::atoms(double alpha, std::vector<StableAtom> atoms, double diffusivity) {
  StableParams p;
  p.alpha_ = alpha;
  p.diffusivity_ = diffusivity;
  p.measure_ = SpectralMeasure::Atoms;
  p.check_alpha();
  if (atoms.empty()) throw ParameterError("atom list is empty");
  const auto dim = atoms.front().direction.size();
  if (dim < 1 || dim > 3) throw ParameterError("atom directions must have dimension 1, 2 or 3");
  for (auto& a : atoms) {
    if (a.direction.size() != dim) throw ParameterError("atom directions have mixed dimensions");
    if (!(a.weight > 0.0)) throw ParameterError("atom weights must be > 0");
    const double norm = a.direction.norm();
    if (!(norm > 0.0)) throw ParameterError("atom direction must be non-zero");
    a.direction /= norm;
  }
  for (const auto& a : atoms) {
    bool mirrored = false;
    for (const auto& b : atoms)
      if ((a.direction + b.direction).norm() < 1e-12 && std::abs(a.weight - b.weight) <= 1e-12 * a.weight)
        mirrored = true;
    if (!mirrored) throw ParameterError("atom measure is not symmetric: every (zeta, w) needs (-zeta, w)");
  }
  p.atoms_ = std::move(atoms);
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& dir : unit_directions(static_cast<int>(dim))) lowest = std::min(lowest, atom_sum(p.atoms_, alpha, dir));
  if (lowest <= kDegenerate) throw ParameterError("atom measure is degenerate: some direction carries no noise");
  return p;
}

int StableParams::dimension() const {
  return atoms_.empty() ? 0 : static_cast<int>(atoms_.front().direction.size());
}

double StableParams::ellipticity(int d) const {
  if (measure_ == SpectralMeasure::Isotropic) return 1.0;
  if (d != dimension()) throw ParameterError("ellipticity requested in a dimension the atoms do not live in");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& dir : unit_directions(d)) {
    const double s = atom_sum(atoms_, alpha_, dir);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return std::max({1.0, 1.0 / lo, hi});
}

double stable_symbol(const StableParams& params, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (params.measure() == SpectralMeasure::Isotropic)
    return params.diffusivity() * std::pow(xi.norm(), params.alpha());
  if (xi.size() != params.dimension()) throw ParameterError("frequency dimension does not match the atoms");
  return params.diffusivity() * atom_sum(params.atom_list(), params.alpha(), xi);
}

Eigen::ArrayXd stable_symbol_on(const StableParams& params, const Spectral& spectral) {
  const int d = spectral.grid().d;
  const double c = params.diffusivity();
  const double alpha = params.alpha();
  if (params.measure() == SpectralMeasure::Isotropic) {
    if (alpha == 2.0) return c * spectral.wavenumber_norm2();
    return c * spectral.wavenumber_norm2().pow(alpha / 2.0);
  }
  if (params.dimension() != d) throw ParameterError("noise atoms live in a different dimension than the grid");
  Eigen::ArrayXd psi = Eigen::ArrayXd::Zero(spectral.spectral_size());
  for (const auto& a : params.atom_list()) {
    Eigen::ArrayXd proj = Eigen::ArrayXd::Zero(spectral.spectral_size());
    for (int k = 0; k < d; ++k) proj += a.direction(k) * spectral.wavenumber(k);
    psi += a.weight * proj.abs().pow(alpha);
  }
  return c * psi;
}

namespace {

double shell_minimum(const Eigen::ArrayXd& psi, const Spectral& sp) {
  double lo = std::numeric_limits<double>::infinity();
  for (auto idx : sp.nyquist_shell()) lo = std::min(lo, psi(idx));
  return lo;
}

void check_resolution(const StableParams& params, double t, const GridSpec& grid, double tolerance,
                      const Eigen::ArrayXd& psi, const Spectral& sp) {
  if (std::exp(-t * shell_minimum(psi, sp)) <= tolerance) return;
  const int need = minimal_points(params, t, grid, tolerance);
  std::ostringstream os;
  os << "grid under-resolves p_t at t=" << t << ": exp(-t psi) at the Nyquist shell exceeds " << tolerance
     << "; need N >= " << need;
  throw ResolutionError(os.str(), need);
}

}  // namespace

int minimal_points(const StableParams& params, double t, const GridSpec& grid, double tolerance) {
  if (!(t > 0.0)) throw ParameterError("time must be > 0");
  const Spectral& sp = spectral_for(grid);
  const double lo = shell_minimum(stable_symbol_on(params, sp), sp);
  const double needed = std::log(1.0 / tolerance) / t;
  // psi is homogeneous of degree alpha in the frequency scale
  int n = grid.points;
  double current = lo;
  while (current < needed) {
    n *= 2;
    current = lo * std::pow(static_cast<double>(n) / grid.points, params.alpha());
  }
  return n;
}

ScalarField stable_density(const StableParams& params, double t, const GridSpec& grid, double tolerance) {
  if (!(t > 0.0)) throw ParameterError("time must be > 0");
  const Spectral& sp = spectral_for(grid);
  const Eigen::ArrayXd psi = stable_symbol_on(params, sp);
  check_resolution(params, t, grid, tolerance, psi, sp);
  return ScalarField(grid, sp.inverse((-t * psi).exp().cast<std::complex<double>>()));
}

VectorField stable_density_gradient(const StableParams& params, double t, const GridSpec& grid, double tolerance) {
  if (!(t > 0.0)) throw ParameterError("time must be > 0");
  const Spectral& sp = spectral_for(grid);
  const Eigen::ArrayXd psi = stable_symbol_on(params, sp);
  check_resolution(params, t, grid, tolerance, psi, sp);
  const Eigen::ArrayXd kernel = (-t * psi).exp();
  VectorField out(grid);
  const std::complex<double> i(0.0, 1.0);
  for (int a = 0; a < grid.d; ++a)
    out.values.col(a) = sp.inverse(i * (sp.derivative_wavenumber(a) * kernel).cast<std::complex<double>>());
  return out;
}

namespace {

// Positive a-stable variable with Laplace transform exp(-lambda^a), 0 < a < 1
// (Kanter's representation).
double positive_stable(double a, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, std::numbers::pi);
  std::exponential_distribution<double> expo(1.0);
  double u = unif(rng);
  while (u == 0.0) u = unif(rng);
  const double w = expo(rng);
  return std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) * std::pow(std::sin((1.0 - a) * u) / w, (1.0 - a) / a);
}

// Symmetric stable with characteristic function exp(-|u|^alpha)
// (Chambers-Mallows-Stuck).
double symmetric_stable(double alpha, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  std::exponential_distribution<double> expo(1.0);
  const double v = unif(rng);
  const double w = expo(rng);
  if (alpha == 2.0) return 2.0 * std::sin(v) * std::sqrt(w);
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
}

}  // namespace

Eigen::MatrixXd sample_increments(const StableParams& params, int d, double dt, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw ParameterError("increment count must be >= 1");
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  if (d < 1 || d > 3) throw ParameterError("dimension must be 1, 2 or 3");
  if (params.measure() != SpectralMeasure::Isotropic && params.dimension() != d)
    throw ParameterError("noise atoms live in a different dimension");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double alpha = params.alpha();
  const double c = params.diffusivity();
  Eigen::MatrixXd out(n, d);
  if (params.measure() == SpectralMeasure::Isotropic) {
    // X = (c dt)^(1/alpha) sqrt(2 A) Z has E exp(i xi.X) = exp(-c dt |xi|^alpha)
    const double scale = std::pow(c * dt, 1.0 / alpha);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double amp = (alpha == 2.0) ? 1.0 : positive_stable(alpha / 2.0, rng);
      const double s = scale * std::sqrt(2.0 * amp);
      for (int k = 0; k < d; ++k) out(r, k) = s * normal(rng);
    }
    return out;
  }
  const auto& atoms = params.atom_list();
  std::vector<double> scales;
  for (const auto& a : atoms) scales.push_back(std::pow(c * a.weight * dt, 1.0 / alpha));
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < atoms.size(); ++i) x += atoms[i].direction * (scales[i] * symmetric_stable(alpha, rng));
    out.row(r) = x.transpose();
  }
  return out;
}

}  // namespace mkv
