#include "mkv/besov.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "mkv/spectral.hpp"

namespace mkv {

namespace {

bool valid_exponent(double p) { return std::isinf(p) ? p > 0 : p >= 1.0; }

double inverse_of(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

int derivative_count(double ratio) {
  if (ratio < 0.0) return 0;
  return static_cast<int>(std::floor(ratio)) + 1;
}

Eigen::ArrayXd low_pass(const Spectral& sp) {
  const double xi0 = 0.5 * sp.nyquist();
  const Eigen::ArrayXd r2 = sp.wavenumber_norm2() / (xi0 * xi0);
  Eigen::ArrayXd phi = Eigen::ArrayXd::Zero(r2.size());
  for (Eigen::Index k = 0; k < r2.size(); ++k)
    if (r2(k) < 1.0) phi(k) = std::exp(1.0 - 1.0 / (1.0 - r2(k)));
  return phi;
}

}  // namespace

void BesovIndex::validate() const {
  if (!std::isfinite(gamma)) throw ParameterError("Besov regularity gamma must be finite");
  if (!valid_exponent(ell)) throw ParameterError("Besov integrability ell must be >= 1");
  if (!valid_exponent(m)) throw ParameterError("Besov summability m must be >= 1");
}

void ThermicQuadrature::validate() const {
  if (nodes < 8) throw ParameterError("thermic quadrature needs at least 8 nodes");
  if (v_min < 0.0 || v_min >= 1.0) throw ParameterError("thermic quadrature v_min must lie in [0, 1)");
  if (!(reference_alpha > 0.0 && reference_alpha <= 2.0)) throw ParameterError("reference alpha must lie in (0, 2]");
}

double conjugate(double p) {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return kInf;
  return p / (p - 1.0);
}

ThermicResult thermic_norm_detail(const ScalarField& f, const BesovIndex& idx, const ThermicQuadrature& quad) {
  idx.validate();
  quad.validate();
  if (!f.all_finite()) throw NumericalError("thermic norm of a non-finite field");
  const GridSpec& g = f.grid;
  const Spectral& sp = spectral_for(g);
  const Eigen::ArrayXcd fhat = sp.forward(f.values);
  const double cell = g.cell_volume();

  ThermicResult res;
  res.low_frequency = lebesgue_norm(sp.inverse(fhat * low_pass(sp).cast<std::complex<double>>()), idx.ell, cell);

  const double a = quad.reference_alpha;
  const double ratio = idx.gamma / a;
  const int n = derivative_count(ratio);
  res.order = n;
  const Eigen::ArrayXd psi = (a == 2.0) ? Eigen::ArrayXd(sp.wavenumber_norm2()) : Eigen::ArrayXd(sp.wavenumber_norm2().pow(a / 2.0));
  const Eigen::ArrayXd factor = (n == 0) ? Eigen::ArrayXd(Eigen::ArrayXd::Ones(psi.size())) : Eigen::ArrayXd((-psi).pow(n));

  const double vmin = quad.v_min > 0.0 ? quad.v_min : std::pow(g.spacing() / g.half_width, 2);
  const int k = quad.nodes;
  const double span = -std::log(vmin);
  const double step = span / (k - 1);
  Eigen::ArrayXd values(k);
  for (int j = 0; j < k; ++j) {
    const double v = std::exp(-span + j * step);
    const Eigen::ArrayXd mult = factor * (-v * psi).exp();
    const double norm = lebesgue_norm(sp.inverse(fhat * mult.cast<std::complex<double>>()), idx.ell, cell);
    values(j) = std::pow(v, n - ratio) * norm;
  }

  if (std::isinf(idx.m)) {
    res.thermic = values.maxCoeff();
    res.tail_estimate = res.thermic > 0.0 ? values(0) / res.thermic : 0.0;
  } else {
    const double peak = values.maxCoeff();
    if (peak > 0.0) {
      Eigen::ArrayXd w = Eigen::ArrayXd::Constant(k, step);
      w(0) *= 0.5;
      w(k - 1) *= 0.5;
      const Eigen::ArrayXd terms = w * (values / peak).pow(idx.m);
      const double total = terms.sum();
      res.thermic = peak * std::pow(total, 1.0 / idx.m);
      res.tail_estimate = terms(0) / total;
    }
  }
  res.converged = res.tail_estimate <= quad.tail_tolerance;
  res.norm = res.low_frequency + res.thermic;
  return res;
}

double thermic_norm(const ScalarField& f, const BesovIndex& idx, const ThermicQuadrature& quad) {
  return thermic_norm_detail(f, idx, quad).norm;
}

double weighted_sup_norm(const Trajectory& traj, const WeightedNormSpec& spec, const ThermicQuadrature& quad) {
  if (traj.empty()) throw ParameterError("weighted norm of an empty trajectory");
  if (!std::isfinite(spec.theta)) throw ParameterError("weight exponent theta must be finite");
  double best = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double lag = traj.stamps[i] - spec.t_origin;
    if (!(lag > 0.0)) throw ParameterError("trajectory stamp does not lie after the weight origin");
    best = std::max(best, std::pow(lag, spec.theta) * thermic_norm(traj.densities[i], spec.space, quad));
  }
  return best;
}

double heat_kernel_exponent(double alpha, int d, const BesovIndex& idx, int derivative_order) {
  return idx.gamma / alpha + (d / alpha) * (1.0 - inverse_of(idx.ell)) + derivative_order / alpha;
}

ScalingFit heat_kernel_norm_scaling(const StableParams& params, const BesovIndex& idx, int derivative_order,
                                    const std::vector<double>& times, const GridSpec& grid,
                                    const ThermicQuadrature& quad) {
  if (derivative_order != 0 && derivative_order != 1) throw ParameterError("derivative order must be 0 or 1");
  ScalingFit fit;
  fit.expected = -heat_kernel_exponent(params.alpha(), grid.d, idx, derivative_order);
  for (double t : times) {
    double norm = 0.0;
    try {
      if (derivative_order == 0)
        norm = thermic_norm_detail(stable_density(params, t, grid), idx, quad).thermic;
      else
        norm = thermic_norm_detail(stable_density_gradient(params, t, grid).component(0), idx, quad).thermic;
    } catch (const ResolutionError&) {
      continue;
    }
    if (!(norm > 0.0) || !std::isfinite(norm)) continue;
    fit.times.push_back(t);
    fit.norms.push_back(norm);
  }
  if (fit.times.size() < 4) throw ParameterError("heat-kernel scaling fit needs at least 4 usable times");
  const auto n = static_cast<Eigen::Index>(fit.times.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::log(fit.times[static_cast<std::size_t>(i)]);
    rhs(i) = std::log(fit.norms[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector2d coef = (design.transpose() * design).ldlt().solve(design.transpose() * rhs);
  fit.slope = coef(1);
  return fit;
}

double check_young(const ScalarField& f, const ScalarField& g, const BesovIndex& target, const YoungSplit& split,
                   const ThermicQuadrature& quad) {
  require_same_grid(f.grid, g.grid, "check_young");
  target.validate();
  if (!valid_exponent(split.ell1) || !valid_exponent(split.ell2)) throw ParameterError("Young split needs ell1, ell2 >= 1");
  if (!(split.m1 > 0.0) || !(split.m2 > 0.0)) throw ParameterError("Young split needs m1, m2 > 0");
  const double lhs = 1.0 + inverse_of(target.ell);
  const double rhs = inverse_of(split.ell1) + inverse_of(split.ell2);
  if (std::abs(lhs - rhs) > 1e-12) throw ParameterError("Young exponents violate 1 + 1/ell = 1/ell1 + 1/ell2");
  if (inverse_of(split.m1) < std::max(inverse_of(target.m) - inverse_of(split.m2), 0.0) - 1e-12)
    throw ParameterError("Young exponents violate 1/m1 >= max(1/m - 1/m2, 0)");
  const ScalarField conv(f.grid, convolve(f, g));
  const double num = thermic_norm(conv, target, quad);
  if (num == 0.0) return 0.0;
  const double nf = thermic_norm(f, {target.gamma - split.delta, split.ell1, split.m1}, quad);
  const double ng = thermic_norm(g, {split.delta, split.ell2, split.m2}, quad);
  return num / (nf * ng);
}

double check_duality(const ScalarField& f, const ScalarField& g, const BesovIndex& idx, const ThermicQuadrature& quad) {
  require_same_grid(f.grid, g.grid, "check_duality");
  idx.validate();
  const double num = std::abs((f.values * g.values).sum() * f.grid.cell_volume());
  if (num == 0.0) return 0.0;
  const double nf = thermic_norm(f, idx, quad);
  const double ng = thermic_norm(g, {-idx.gamma, conjugate(idx.ell), conjugate(idx.m)}, quad);
  return num / (nf * ng);
}

}  // namespace mkv
