#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mkv/grid.hpp"

namespace mkv {

class Spectral;

enum class SpectralMeasure { Isotropic, Cylindrical, Atoms };

struct StableAtom {
  Eigen::VectorXd direction;  // unit vector
  double weight = 0.0;
};

/// Symmetric non-degenerate alpha-stable driving noise with symbol
///   Isotropic:  psi(xi) = c |xi|^alpha
///   Atoms:      psi(xi) = c sum_i w_i |zeta_i . xi|^alpha
/// Cylindrical is the atom set {+-e_k, weight 1/2} in the grid dimension.
/// With c = 1/2 and alpha = 2 the symbol is that of standard Brownian motion.
class StableParams {
 public:
  static StableParams isotropic(double alpha, double diffusivity = 0.5);
  static StableParams cylindrical(double alpha, int dimension, double diffusivity = 0.5);
  /// Atoms must come in symmetric pairs (zeta, w), (-zeta, w); directions are
  /// normalised. Throws ParameterError for an asymmetric or degenerate set.
  static StableParams atoms(double alpha, std::vector<StableAtom> atoms, double diffusivity = 0.5);

  double alpha() const { return alpha_; }
  double diffusivity() const { return diffusivity_; }
  SpectralMeasure measure() const { return measure_; }
  const std::vector<StableAtom>& atom_list() const { return atoms_; }
  /// Dimension fixed by the atoms, 0 for Isotropic (any dimension).
  int dimension() const;

  /// Smallest kappa >= 1 with kappa^-1 |l|^a <= psi(l)/c <= kappa |l|^a,
  /// estimated over a dense set of unit directions in dimension d.
  double ellipticity(int d) const;

 private:
  StableParams() = default;
  void check_alpha() const;

  double alpha_ = 2.0;
  double diffusivity_ = 0.5;
  SpectralMeasure measure_ = SpectralMeasure::Isotropic;
  std::vector<StableAtom> atoms_;
};

/// psi(xi).
double stable_symbol(const StableParams& params, const Eigen::Ref<const Eigen::VectorXd>& xi);

/// psi evaluated at every spectral index of a grid.
Eigen::ArrayXd stable_symbol_on(const StableParams& params, const Spectral& spectral);

/// Smallest power-of-two N for which exp(-t psi) is below `tolerance` on the
/// Nyquist shell of [-L, L)^d.
int minimal_points(const StableParams& params, double t, const GridSpec& grid, double tolerance);

/// Default truncation tolerance for exp(-t psi) at the Nyquist shell.
inline constexpr double kNyquistTolerance = 1e-10;

/// Density p_t of the driving process on the torus: inverse transform of
/// exp(-t psi). Throws ResolutionError when exp(-t psi) at the Nyquist shell
/// exceeds `tolerance`; the error carries the minimal N.
ScalarField stable_density(const StableParams& params, double t, const GridSpec& grid,
                           double tolerance = kNyquistTolerance);

/// Gradient of p_t via the multiplier i xi.
VectorField stable_density_gradient(const StableParams& params, double t, const GridSpec& grid,
                                    double tolerance = kNyquistTolerance);

/// n i.i.d. increments W_{s+dt} - W_s in R^d, one per row. Deterministic in
/// `seed`. Isotropic noise is drawn by subordination (Gaussian scaled by a
/// positive alpha/2-stable amplitude); atoms by one symmetric 1-D stable
/// draw per atom.
Eigen::MatrixXd sample_increments(const StableParams& params, int d, double dt, Eigen::Index n, std::uint64_t seed);

}  // namespace mkv
