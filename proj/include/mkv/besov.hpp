#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "mkv/grid.hpp"
#include "mkv/stable_noise.hpp"
#include "mkv/trajectory.hpp"

namespace mkv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Regularity gamma, integrability ell, summability m; ell and m may be kInf.
struct BesovIndex {
  double gamma = 0.0;
  double ell = 2.0;
  double m = kInf;

  void validate() const;
};

/// Hoelder conjugate with 1' = inf and inf' = 1.
double conjugate(double p);

/// v-quadrature and reference kernel of the thermic norm.
struct ThermicQuadrature {
  int nodes = 64;
  double v_min = 0.0;             // 0 selects (h / L)^2
  double reference_alpha = 2.0;   // reference kernel symbol |xi|^alpha
  double tail_tolerance = 0.05;   // relative weight of the smallest-v node

  void validate() const;
};

struct ThermicResult {
  double norm = 0.0;
  double low_frequency = 0.0;
  double thermic = 0.0;
  int order = 0;                   // n, the number of v-derivatives
  double tail_estimate = 0.0;      // share of the thermic part carried by the smallest v node
  bool converged = true;
};

/// |F^-1(phi F f)|_{L^ell} + T^gamma_{ell,m}(f) with
///   T = ( int_{v_min}^1 (v^{n - gamma/a} |d^n_v p~_v * f|_{L^ell})^m dv/v )^{1/m},
/// p~_v the isotropic a-stable density with symbol |xi|^a, n the smallest
/// non-negative integer above gamma/a, and phi the radial bump
/// exp(1 - 1/(1 - |xi/xi0|^2)) with xi0 half the Nyquist wavenumber.
/// The v-integral is a trapezoid rule in log v; m = inf is a max over nodes.
ThermicResult thermic_norm_detail(const ScalarField& f, const BesovIndex& idx, const ThermicQuadrature& quad = {});
double thermic_norm(const ScalarField& f, const BesovIndex& idx, const ThermicQuadrature& quad = {});

struct WeightedNormSpec {
  double theta = 0.0;
  double t_origin = 0.0;
  BesovIndex space;
};

/// max over stamps of (s - t)^theta |rho(s)|_{B}.
double weighted_sup_norm(const Trajectory& traj, const WeightedNormSpec& spec, const ThermicQuadrature& quad = {});

struct ScalingFit {
  double slope = 0.0;
  double expected = 0.0;
  std::vector<double> times;
  std::vector<double> norms;
};

/// Least-squares slope of log T(d^a p_t) against log t, T the thermic
/// (homogeneous) part of the norm and d^1 the derivative along the first axis. Times the grid cannot resolve are
/// skipped; fewer than 4 usable norms is a ParameterError.
ScalingFit heat_kernel_norm_scaling(const StableParams& params, const BesovIndex& idx, int derivative_order,
                                    const std::vector<double>& times, const GridSpec& grid,
                                    const ThermicQuadrature& quad = {});

/// Exponent gamma/alpha + (d/alpha)(1 - 1/ell) + a/alpha of the heat-kernel bound.
double heat_kernel_exponent(double alpha, int d, const BesovIndex& idx, int derivative_order);

struct YoungSplit {
  double delta = 0.0;
  double ell1 = 1.0;
  double ell2 = 1.0;
  double m1 = kInf;
  double m2 = kInf;
};

/// |f * g|_{B^gamma_{ell,m}} / (|f|_{B^{gamma-delta}_{ell1,m1}} |g|_{B^delta_{ell2,m2}}).
/// Requires 1 + 1/ell = 1/ell1 + 1/ell2 and 1/m1 >= max(1/m - 1/m2, 0).
/// Returns 0 when f * g vanishes.
double check_young(const ScalarField& f, const ScalarField& g, const BesovIndex& target, const YoungSplit& split,
                   const ThermicQuadrature& quad = {});

/// |int f g| / (|f|_{B^gamma_{ell,m}} |g|_{B^-gamma_{ell',m'}}); 0 when the numerator is 0.
double check_duality(const ScalarField& f, const ScalarField& g, const BesovIndex& idx,
                     const ThermicQuadrature& quad = {});

}  // namespace mkv
