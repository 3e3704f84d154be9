#include "mkv/kernels.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "mkv/spectral.hpp"

namespace mkv {

namespace {

using cd = std::complex<double>;

Eigen::ArrayXd gaussian_symbol(const Spectral& sp, double eps) {
  return (-0.5 * eps * eps * sp.wavenumber_norm2()).exp();
}

void require_resolved(const GridSpec& grid, double eps) {
  if (eps >= minimal_epsilon(grid) * (1.0 - 1e-12)) return;
  int n = grid.points;
  while (2.0 * (2.0 * grid.half_width / n) > eps) n *= 2;
  std::ostringstream os;
  os << "mollification scale eps=" << eps << " is below 2h=" << minimal_epsilon(grid) << "; need N >= " << n;
  throw ResolutionError(os.str(), n);
}

double poisson_constant(int d) { return d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi; }

}  // namespace

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Zero: return "zero";
    case KernelKind::BurgersDirac: return "burgers";
    case KernelKind::BiotSavart2D: return "biot-savart";
    case KernelKind::KellerSegel: return "keller-segel";
    case KernelKind::Custom: return "custom";
  }
  return "unknown";
}

void KernelSpec::validate() const {
  if (!(radius > 0.0)) throw ParameterError("cutoff radius R must be > 0");
  if (!(chi > 0.0)) throw ParameterError("sensitivity chi must be > 0");
  if (!(epsilon >= 0.0)) throw ParameterError("mollification scale epsilon must be >= 0");
  if (kind == KernelKind::Custom && !custom) throw ParameterError("custom kernel needs a vector field");
}

double smooth_cutoff(double radius, double r) {
  if (r <= radius) return 1.0;
  if (r >= radius + 1.0) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (r - radius)));
}

double smooth_cutoff(double radius, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return smooth_cutoff(radius, x.norm());
}

Eigen::VectorXd kernel_value(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x, double reg) {
  const double r2 = x.squaredNorm() + reg * reg;
  const double cut = smooth_cutoff(spec.radius, x.norm());
  switch (spec.kind) {
    case KernelKind::BiotSavart2D: {
      if (x.size() != 2) throw ParameterError("Biot-Savart kernel is two-dimensional");
      Eigen::VectorXd v(2);
      v << -x(1), x(0);
      return v * (cut / (2.0 * std::numbers::pi * r2));
    }
    case KernelKind::KellerSegel: {
      const int d = static_cast<int>(x.size());
      if (d < 2 || d > 3) throw ParameterError("Keller-Segel kernel needs dimension 2 or 3");
      return -spec.chi * x * (cut / (poisson_constant(d) * std::pow(r2, 0.5 * d)));
    }
    default:
      throw ParameterError(std::string("no pointwise kernel for kind ") + to_string(spec.kind));
  }
}

double minimal_epsilon(const GridSpec& grid) { return 2.0 * grid.spacing(); }
double default_epsilon(const GridSpec& grid) { return 4.0 * grid.spacing(); }

ScalarField mollify(const ScalarField& f, double eps) {
  require_resolved(f.grid, eps);
  const Spectral& sp = spectral_for(f.grid);
  return ScalarField(f.grid, sp.inverse(sp.forward(f.values) * gaussian_symbol(sp, eps).cast<cd>()));
}

VectorField mollify_kernel(const VectorField& b, double eps) {
  require_resolved(b.grid, eps);
  const Spectral& sp = spectral_for(b.grid);
  const Eigen::ArrayXcd g = gaussian_symbol(sp, eps).cast<cd>();
  VectorField out(b.grid);
  for (int j = 0; j < b.components(); ++j) out.values.col(j) = sp.inverse(sp.forward(b.values.col(j)) * g);
  return out;
}

ScalarField divergence(const VectorField& b) {
  const Spectral& sp = spectral_for(b.grid);
  Eigen::ArrayXcd acc = Eigen::ArrayXcd::Zero(sp.spectral_size());
  const cd i(0.0, 1.0);
  for (int j = 0; j < b.components(); ++j)
    acc += i * sp.derivative_wavenumber(j).cast<cd>() * sp.forward(b.values.col(j));
  return ScalarField(b.grid, sp.inverse(acc));
}

VectorField gradient(const ScalarField& f) {
  const Spectral& sp = spectral_for(f.grid);
  const Eigen::ArrayXcd fhat = sp.forward(f.values);
  const cd i(0.0, 1.0);
  VectorField out(f.grid);
  for (int j = 0; j < f.grid.d; ++j) out.values.col(j) = sp.inverse(i * sp.derivative_wavenumber(j).cast<cd>() * fhat);
  return out;
}

Kernel build_kernel(const KernelSpec& spec, const GridSpec& grid) {
  spec.validate();
  grid.validate();
  Kernel k;
  k.kind = spec.kind;
  const bool custom = spec.kind == KernelKind::Custom;
  k.epsilon = spec.epsilon > 0.0 ? spec.epsilon : (custom ? 0.0 : default_epsilon(grid));
  if (k.epsilon > 0.0) require_resolved(grid, k.epsilon);
  const Spectral& sp = spectral_for(grid);

  switch (spec.kind) {
    case KernelKind::Zero:
      k.b = VectorField(grid);
      break;
    case KernelKind::BurgersDirac: {
      if (grid.d != 1) throw ParameterError("the Burgers kernel needs a 1-D grid");
      k.b = VectorField(grid);
      k.b.values.col(0) = sp.inverse((0.5 * gaussian_symbol(sp, k.epsilon)).cast<cd>());
      break;
    }
    case KernelKind::BiotSavart2D:
    case KernelKind::KellerSegel: {
      if (spec.kind == KernelKind::BiotSavart2D && grid.d != 2)
        throw ParameterError("the Biot-Savart kernel needs a 2-D grid");
      if (spec.kind == KernelKind::KellerSegel && grid.d < 2)
        throw ParameterError("the Keller-Segel kernel needs a 2-D or 3-D grid");
      if (!(spec.radius + 1.0 < grid.half_width))
        throw ParameterError("cutoff support R + 1 must lie inside the box half-width L");
      const Eigen::ArrayXXd xs = grid.coordinates();
      VectorField raw(grid);
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Eigen::VectorXd x = xs.row(i).transpose().matrix();
        raw.values.row(i) = kernel_value(spec, x, k.epsilon).transpose().array();
      }
      k.b = mollify_kernel(raw, k.epsilon);
      break;
    }
    case KernelKind::Custom: {
      require_same_grid(spec.custom->grid, grid, "custom kernel");
      k.b = k.epsilon > 0.0 ? mollify_kernel(*spec.custom, k.epsilon) : *spec.custom;
      break;
    }
  }
  if (!k.b.all_finite()) throw NumericalError("kernel construction produced non-finite values");
  k.div_b = divergence(k.b);
  return k;
}

ScalarField cole_hopf_reference(const ScalarField& u0, double s) {
  const GridSpec& g = u0.grid;
  if (g.d != 1) throw ParameterError("the Cole-Hopf reference is one-dimensional");
  if (!(s > 0.0)) throw ParameterError("Cole-Hopf time must be > 0");
  if (u0.values.minCoeff() < -1e-12) throw ParameterError("u0 must be non-negative");
  if (std::abs(u0.integral() - 1.0) > 1e-6) throw ParameterError("u0 must integrate to 1 (within 1e-6)");

  const Spectral& sp = spectral_for(g);
  const Eigen::Index n = g.size();
  const double h = g.spacing();
  const double L = g.half_width;
  const double mean = u0.integral() / (2.0 * L);

  // F(x) = int_{-L}^x u0 = mean (x + L) + periodic antiderivative of (u0 - mean)
  Eigen::ArrayXcd hat = sp.forward(u0.values - mean);
  const Eigen::ArrayXd& xi = sp.derivative_wavenumber(0);
  const cd i(0.0, 1.0);
  for (Eigen::Index k = 0; k < hat.size(); ++k) hat(k) = xi(k) != 0.0 ? hat(k) / (i * xi(k)) : cd(0.0);
  Eigen::ArrayXd anti = sp.inverse(hat);
  anti -= anti(0);
  Eigen::ArrayXd F(n);
  for (Eigen::Index j = 0; j < n; ++j) F(j) = mean * (g.coordinate(static_cast<int>(j)) + L) + anti(j);

  const Eigen::ArrayXd phi0 = (-F).exp();
  const Eigen::ArrayXd weighted = u0.values * phi0;

  const double sd = std::sqrt(s);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * s);
  Eigen::ArrayXd table(2 * n - 1);
  for (Eigen::Index k = -(n - 1); k <= n - 1; ++k) {
    const double z = k * h;
    table(k + n - 1) = norm * std::exp(-0.5 * z * z / s);
  }
  auto upper_tail = [&](double z) { return 0.5 * std::erfc(z / (sd * std::numbers::sqrt2)); };

  const double x_first = g.coordinate(0);
  const double x_last = g.coordinate(static_cast<int>(n - 1));
  Eigen::ArrayXd out(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      const double w = (b == 0 || b == n - 1) ? 0.5 * h : h;
      const double gk = table(a - b + n - 1) * w;
      num += gk * weighted(b);
      den += gk * phi0(b);
    }
    const double x = g.coordinate(static_cast<int>(a));
    den += phi0(0) * upper_tail(x - x_first);
    den += phi0(n - 1) * upper_tail(x_last - x);
    out(a) = num / den;
  }
  if (!out.allFinite()) throw NumericalError("Cole-Hopf quadrature produced non-finite values");
  return ScalarField(g, out);
}

}  // namespace mkv
