#pragma once

#include <optional>

#include <Eigen/Core>

#include "mkv/grid.hpp"

namespace mkv {

enum class KernelKind { Zero, BurgersDirac, BiotSavart2D, KellerSegel, Custom };

const char* to_string(KernelKind kind);

struct KernelSpec {
  KernelKind kind = KernelKind::Zero;
  double radius = 2.0;     // cutoff radius R (Biot-Savart, Keller-Segel)
  double chi = 1.0;        // sensitivity (Keller-Segel)
  double epsilon = 0.0;    // mollification scale; 0 selects 4h (Custom: no mollification)
  std::optional<VectorField> custom;

  void validate() const;
};

struct Kernel {
  VectorField b;
  ScalarField div_b;
  double epsilon = 0.0;
  KernelKind kind = KernelKind::Zero;
};

/// 1 for r <= R, 0 for r >= R + 1, (1 + cos(pi (r - R))) / 2 in between.
double smooth_cutoff(double radius, double r);
double smooth_cutoff(double radius, const Eigen::Ref<const Eigen::VectorXd>& x);

/// K(x) times the cutoff, with |x|^2 replaced by |x|^2 + reg^2 (reg = 0 is the
/// singular kernel). Defined for Biot-Savart and Keller-Segel only.
Eigen::VectorXd kernel_value(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x, double reg = 0.0);

/// Samples the kernel on the grid and mollifies it. Burgers: b = G_eps / 2.
/// Biot-Savart and Keller-Segel: regularized K times the cutoff, then
/// Gaussian-mollified at scale eps. div_b is computed spectrally.
/// Throws ResolutionError when eps < 2h and ParameterError when the grid
/// dimension does not fit the kind or the cutoff support leaves the box.
Kernel build_kernel(const KernelSpec& spec, const GridSpec& grid);

/// Convolution with a centred Gaussian of standard deviation eps (eps >= 2h).
VectorField mollify_kernel(const VectorField& b, double eps);
ScalarField mollify(const ScalarField& f, double eps);

/// Spectral divergence.
ScalarField divergence(const VectorField& b);
/// Spectral gradient.
VectorField gradient(const ScalarField& f);

/// Smallest scale the grid accepts for a mollifier (2h).
double minimal_epsilon(const GridSpec& grid);
/// 4h.
double default_epsilon(const GridSpec& grid);

/// Solution at time s of d_s u + d_x(u^2 / 2) = (1/2) d_xx u on the line,
/// u = -d_x log(G_s * exp(-int_{-inf}^x u0)), evaluated by direct quadrature
/// against the Gaussian of variance s with the constant far-field tails of
/// exp(-int u0) added in closed form. u0 must be a 1-D probability density.
ScalarField cole_hopf_reference(const ScalarField& u0, double s);

}  // namespace mkv
