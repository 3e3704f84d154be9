#include "mkv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>

#include "mkv/spectral.hpp"

namespace mkv {

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::Blowup: return "blowup";
    case RunStatus::MaxIters: return "max_iters";
  }
  return "unknown";
}

namespace {

using cd = std::complex<double>;

// (1 - e^-z) / z
double phi1(double z) { return z < 1e-12 ? 1.0 - 0.5 * z : -std::expm1(-z) / z; }

// (1 - e^-z (1 + z)) / z^2
double phi2(double z) {
  if (z < 0.1) {
    double term = 1.0;
    double sum = 0.5;
    for (int n = 1; n < 12; ++n) {
      term *= -z / n;
      sum += term / (n + 2);
    }
    return sum;
  }
  return -(std::expm1(-z) + z * std::exp(-z)) / (z * z);
}

/// Spectral pieces of the Duhamel map for one configuration.
class Engine {
 public:
  Engine(const SolverConfig& cfg, const Kernel& kernel)
      : sp_(spectral_for(cfg.mu0.grid)),
        psi_(stable_symbol_on(cfg.noise, sp_)),
        by_parts_(cfg.indices.beta <= -1.0) {
    for (int j = 0; j < kernel.b.components(); ++j) bhat_.push_back(sp_.forward(kernel.b.values.col(j)));
    divhat_ = sp_.forward(kernel.div_b.values);
  }

  const Spectral& spectral() const { return sp_; }

  /// Spectrum of div(B rho), B = b * rho. For beta = -1 it is assembled as
  /// (div b * rho) rho + B . grad rho.
  Eigen::ArrayXcd nonlinear(const Eigen::ArrayXd& rho, double* drift_sup = nullptr) const {
    const Eigen::ArrayXcd rhat = sp_.forward(rho);
    const int d = static_cast<int>(bhat_.size());
    const cd i(0.0, 1.0);
    double sup = 0.0;
    if (!by_parts_) {
      Eigen::ArrayXcd acc = Eigen::ArrayXcd::Zero(sp_.spectral_size());
      for (int j = 0; j < d; ++j) {
        const Eigen::ArrayXd B = sp_.inverse(bhat_[static_cast<std::size_t>(j)] * rhat);
        sup = std::max(sup, B.abs().maxCoeff());
        acc += i * sp_.derivative_wavenumber(j).cast<cd>() * sp_.forward(B * rho);
      }
      if (drift_sup) *drift_sup = sup;
      return acc;
    }
    Eigen::ArrayXd g = sp_.inverse(divhat_ * rhat) * rho;
    for (int j = 0; j < d; ++j) {
      const Eigen::ArrayXd B = sp_.inverse(bhat_[static_cast<std::size_t>(j)] * rhat);
      sup = std::max(sup, B.abs().maxCoeff());
      g += B * sp_.inverse(i * sp_.derivative_wavenumber(j).cast<cd>() * rhat);
    }
    if (drift_sup) *drift_sup = sup;
    return sp_.forward(g);
  }

  double drift_sup(const Eigen::ArrayXd& rho) const {
    double sup = 0.0;
    nonlinear(rho, &sup);
    return sup;
  }

  /// rho^(s + h) from rho^(s) with the nonlinear term linear in time between g0 and g1.
  Eigen::ArrayXcd advance(const Eigen::ArrayXcd& rhat, double h, const Eigen::ArrayXcd& g0,
                          const Eigen::ArrayXcd& g1) const {
    Eigen::ArrayXcd out(rhat.size());
    for (Eigen::Index k = 0; k < rhat.size(); ++k) {
      const double z = h * psi_(k);
      const double p1 = phi1(z);
      const double p2 = phi2(z);
      out(k) = std::exp(-z) * rhat(k) - h * (p2 * g0(k) + (p1 - p2) * g1(k));
    }
    return out;
  }

  Eigen::ArrayXcd propagate(const Eigen::ArrayXcd& rhat, double h) const {
    return rhat * (-h * psi_).exp().cast<cd>();
  }

 private:
  const Spectral& sp_;
  Eigen::ArrayXd psi_;
  bool by_parts_;
  std::vector<Eigen::ArrayXcd> bhat_;
  Eigen::ArrayXcd divhat_;
};

ConditionReport report_for(const SolverConfig& cfg) {
  LebesgueBesovIndices idx = cfg.indices;
  idx.alpha = cfg.noise.alpha();
  idx.d = cfg.mu0.grid.d;
  return evaluate_conditions(idx);
}

BesovIndex space_for(const ConditionReport& rep, const SolverConfig& cfg) {
  return {-cfg.indices.beta + cfg.vartheta * rep.Gamma, conjugate(cfg.indices.p), 1.0};
}

/// Duhamel map applied to a full set of values on the given stamps.
std::vector<Eigen::ArrayXd> apply_map(const Engine& eng, const std::vector<double>& stamps,
                                      const std::vector<Eigen::ArrayXd>& values) {
  const auto& sp = eng.spectral();
  std::vector<Eigen::ArrayXcd> g;
  g.reserve(values.size());
  for (const auto& v : values) g.push_back(eng.nonlinear(v));
  std::vector<Eigen::ArrayXd> out(values.size());
  out[0] = values[0];
  Eigen::ArrayXcd r = sp.forward(values[0]);
  for (std::size_t j = 0; j + 1 < values.size(); ++j) {
    r = eng.advance(r, stamps[j + 1] - stamps[j], g[j], g[j + 1]);
    out[j + 1] = sp.inverse(r);
  }
  return out;
}

double weight(double s, double t, double theta) { return std::pow(s - t, theta); }

}  // namespace

void SolverConfig::validate() const {
  if (!(t_start < horizon_end)) throw ParameterError("solver needs t_start < S");
  if (mesh_intervals < 8) throw ParameterError("time mesh needs M >= 8 intervals");
  if (!(grading >= 1.0)) throw ParameterError("mesh grading exponent must be >= 1");
  if (!(picard_tol > 0.0)) throw ParameterError("picard_tol must be > 0");
  if (picard_max < 1) throw ParameterError("picard_max must be >= 1");
  if (!(vartheta > 0.0 && vartheta < 1.0)) throw ParameterError("vartheta must lie in (0, 1)");
  if (norm_nodes < 8) throw ParameterError("norm quadrature needs at least 8 nodes");
  if (!(mass_tolerance > 0.0)) throw ParameterError("mass tolerance must be > 0");
  mu0.grid.validate();
  if (mu0.values.size() != mu0.grid.size()) throw ParameterError("initial density does not match its grid");
  if (!mu0.all_finite()) throw ParameterError("initial density has non-finite values");
  if (mu0.values.minCoeff() < -1e-12) throw ParameterError("initial density must be non-negative");
  if (std::abs(mu0.integral() - 1.0) > 1e-6) throw ParameterError("initial density must integrate to 1 (within 1e-6)");
  if (std::abs(indices.alpha - noise.alpha()) > 1e-12)
    throw ParameterError("indices alpha does not match the noise alpha");
  if (indices.d != mu0.grid.d) throw ParameterError("indices dimension does not match the grid");
  kernel.validate();
}

double SolverConfig::effective_blowup_threshold() const {
  return blowup_threshold > 0.0 ? blowup_threshold : 1e3 * mu0.values.maxCoeff();
}

std::vector<double> time_mesh(const SolverConfig& cfg) {
  std::vector<double> s(static_cast<std::size_t>(cfg.mesh_intervals) + 1);
  const double span = cfg.horizon_end - cfg.t_start;
  for (int k = 0; k <= cfg.mesh_intervals; ++k)
    s[static_cast<std::size_t>(k)] =
        cfg.t_start + span * std::pow(static_cast<double>(k) / cfg.mesh_intervals, cfg.grading);
  s.back() = cfg.horizon_end;
  return s;
}

VectorField drift_field(const VectorField& b, const ScalarField& rho) {
  require_same_grid(b.grid, rho.grid, "drift_field");
  const Spectral& sp = spectral_for(rho.grid);
  const Eigen::ArrayXcd rhat = sp.forward(rho.values);
  VectorField out(rho.grid, Eigen::ArrayXXd(rho.grid.size(), b.components()));
  for (int j = 0; j < b.components(); ++j) out.values.col(j) = sp.inverse(sp.forward(b.values.col(j)) * rhat);
  return out;
}

namespace {

void fill_basic(Trajectory& traj, std::size_t j) {
  auto& dg = traj.diagnostics[j];
  dg.mass = traj.densities[j].integral();
  dg.min_value = traj.densities[j].values.minCoeff();
}

}  // namespace

Trajectory free_evolution(const SolverConfig& cfg) {
  cfg.validate();
  const Spectral& sp = spectral_for(cfg.mu0.grid);
  const Eigen::ArrayXd psi = stable_symbol_on(cfg.noise, sp);
  const Eigen::ArrayXcd muhat = sp.forward(cfg.mu0.values);
  const auto mesh = time_mesh(cfg);
  Trajectory traj;
  traj.t_origin = cfg.t_start;
  for (std::size_t k = 1; k < mesh.size(); ++k) {
    traj.stamps.push_back(mesh[k]);
    traj.densities.emplace_back(cfg.mu0.grid, sp.inverse(muhat * (-(mesh[k] - cfg.t_start) * psi).exp().cast<cd>()));
    traj.diagnostics.emplace_back();
    fill_basic(traj, traj.size() - 1);
  }
  return traj;
}

Trajectory duhamel_step(const Trajectory& previous, const SolverConfig& cfg) {
  cfg.validate();
  if (previous.empty()) throw ParameterError("duhamel_step needs a non-empty trajectory");
  const Kernel kernel = build_kernel(cfg.kernel, cfg.mu0.grid);
  const Engine eng(cfg, kernel);
  std::vector<double> stamps{cfg.t_start};
  std::vector<Eigen::ArrayXd> values{cfg.mu0.values};
  for (std::size_t j = 0; j < previous.size(); ++j) {
    require_same_grid(previous.densities[j].grid, cfg.mu0.grid, "duhamel_step");
    stamps.push_back(previous.stamps[j]);
    values.push_back(previous.densities[j].values);
  }
  const auto next = apply_map(eng, stamps, values);
  Trajectory out;
  out.t_origin = cfg.t_start;
  for (std::size_t j = 1; j < next.size(); ++j) {
    if (!next[j].allFinite()) {
      std::ostringstream os;
      os << "non-finite density in the Duhamel map at s=" << stamps[j];
      throw NumericalError(os.str());
    }
    out.stamps.push_back(stamps[j]);
    out.densities.emplace_back(cfg.mu0.grid, next[j]);
    out.diagnostics.emplace_back();
    fill_basic(out, out.size() - 1);
  }
  return out;
}

MildSolution solve_mild(const SolverConfig& cfg) {
  cfg.validate();
  MildSolution sol;
  sol.report = report_for(cfg);
  if (!sol.report.weak() && !cfg.force)
    throw ConditionError("well-posedness conditions fail for the configured indices; use --force to run anyway");
  sol.norm_space = space_for(sol.report, cfg);
  sol.theta = sol.report.theta;

  const GridSpec& grid = cfg.mu0.grid;
  const Kernel kernel = build_kernel(cfg.kernel, grid);
  const Engine eng(cfg, kernel);
  const Spectral& sp = eng.spectral();
  ThermicQuadrature quad;
  quad.nodes = cfg.norm_nodes;
  const double t = cfg.t_start;
  const double theta = sol.theta;
  auto wnorm = [&](double s, const Eigen::ArrayXd& v) {
    return weight(s, t, theta) * thermic_norm(ScalarField(grid, v), sol.norm_space, quad);
  };

  std::vector<double> stamps = time_mesh(cfg);
  std::vector<Eigen::ArrayXd> values(stamps.size());
  std::vector<int> iters(stamps.size(), 0);
  values[0] = cfg.mu0.values;
  sol.initial_drift_sup = eng.drift_sup(values[0]);
  const double threshold = cfg.effective_blowup_threshold();
  const std::size_t full = static_cast<std::size_t>(cfg.mesh_intervals);

  Trajectory& traj = sol.trajectory;
  traj.t_origin = t;
  std::size_t a = 0;
  std::size_t width = full;
  std::size_t last = stamps.size() - 1;
  bool stopped = false;

  while (a < last && !stopped) {
    const std::size_t b = std::min(a + width, last);
    ++sol.windows;
    const int window_id = sol.windows;

    // initial guess: free evolution from the last accepted density
    const Eigen::ArrayXcd ahat = sp.forward(values[a]);
    for (std::size_t j = a + 1; j <= b; ++j) values[j] = sp.inverse(eng.propagate(ahat, stamps[j] - stamps[a]));
    const Eigen::ArrayXcd ga = eng.nonlinear(values[a]);

    bool ok = false;
    bool relaxed = false;
    int rises = 0;
    int used = 0;
    double prev_defect = kInf;
    std::vector<Eigen::ArrayXcd> g(b - a + 1);
    g[0] = ga;
    for (int it = 1; it <= cfg.picard_max; ++it) {
      used = it;
      for (std::size_t j = a + 1; j <= b; ++j) g[j - a] = eng.nonlinear(values[j]);
      Eigen::ArrayXcd r = ahat;
      double defect = 0.0;
      double wn = 0.0;
      bool finite = true;
      for (std::size_t j = a; j < b; ++j) {
        r = eng.advance(r, stamps[j + 1] - stamps[j], g[j - a], g[j + 1 - a]);
        Eigen::ArrayXd next = sp.inverse(r);
        if (relaxed) next = 0.5 * next + 0.5 * values[j + 1];
        if (!next.allFinite()) {
          finite = false;
          break;
        }
        defect = std::max(defect, wnorm(stamps[j + 1], next - values[j + 1]));
        if (cfg.record_history) wn = std::max(wn, wnorm(stamps[j + 1], next));
        values[j + 1] = std::move(next);
      }
      if (!finite || !std::isfinite(defect)) break;
      sol.history.push_back({window_id, it, defect, wn, relaxed});
      if (defect < cfg.picard_tol) {
        ok = true;
        break;
      }
      if (defect > prev_defect) {
        if (!relaxed)
          relaxed = true;
        else if (++rises >= 3)
          break;
      }
      prev_defect = defect;
    }

    if (ok) {
      for (std::size_t j = a + 1; j <= b; ++j) {
        iters[j] = used;
        const ScalarField rho(grid, values[j]);
        const double mass = rho.integral();
        if (values[j].maxCoeff() > threshold || std::abs(mass - 1.0) > cfg.mass_tolerance) {
          traj.status = RunStatus::Blowup;
          traj.blowup_time = stamps[j];
          last = j;
          stopped = true;
          std::ostringstream os;
          os << "blowup at s=" << stamps[j] << " (sup density " << values[j].maxCoeff() << ", mass " << mass << ")";
          sol.message = os.str();
          break;
        }
      }
      a = b;
      width = std::min(2 * width, full);
      continue;
    }
    if (b - a > 1) {
      width = std::max<std::size_t>(1, (b - a) / 2);
      continue;
    }
    if (sol.refinements >= cfg.max_refinements) {
      traj.status = RunStatus::MaxIters;
      std::ostringstream os;
      os << "Picard iteration failed to contract on [" << stamps[a] << ", " << stamps[b]
         << "] after " << sol.refinements << " step halvings";
      sol.message = os.str();
      last = a;
      stopped = true;
      break;
    }
    ++sol.refinements;
    const double mid = 0.5 * (stamps[a] + stamps[a + 1]);
    stamps.insert(stamps.begin() + static_cast<std::ptrdiff_t>(a + 1), mid);
    values.insert(values.begin() + static_cast<std::ptrdiff_t>(a + 1), Eigen::ArrayXd());
    iters.insert(iters.begin() + static_cast<std::ptrdiff_t>(a + 1), 0);
    ++last;
    width = 1;
  }

  for (std::size_t j = 1; j <= last && j < stamps.size(); ++j) {
    if (values[j].size() == 0) break;
    traj.stamps.push_back(stamps[j]);
    traj.densities.emplace_back(grid, values[j]);
    StampDiagnostics dg;
    dg.mass = traj.densities.back().integral();
    dg.min_value = values[j].minCoeff();
    dg.weighted_norm = wnorm(stamps[j], values[j]);
    dg.picard_iters = iters[j];
    dg.drift_sup = eng.drift_sup(values[j]);
    traj.diagnostics.push_back(dg);
  }
  if (sol.message.empty()) {
    std::ostringstream os;
    os << "converged in " << sol.windows << " window(s), " << sol.history.size() << " Picard iterations";
    sol.message = os.str();
  }
  return sol;
}

std::vector<double> duhamel_residual(const MildSolution& sol, const SolverConfig& cfg) {
  const Kernel kernel = build_kernel(cfg.kernel, cfg.mu0.grid);
  const Engine eng(cfg, kernel);
  std::vector<double> stamps{cfg.t_start};
  std::vector<Eigen::ArrayXd> values{cfg.mu0.values};
  for (std::size_t j = 0; j < sol.trajectory.size(); ++j) {
    stamps.push_back(sol.trajectory.stamps[j]);
    values.push_back(sol.trajectory.densities[j].values);
  }
  const auto mapped = apply_map(eng, stamps, values);
  ThermicQuadrature quad;
  quad.nodes = cfg.norm_nodes;
  std::vector<double> out;
  for (std::size_t j = 1; j < stamps.size(); ++j)
    out.push_back(weight(stamps[j], cfg.t_start, sol.theta) *
                  thermic_norm(ScalarField(cfg.mu0.grid, mapped[j] - values[j]), sol.norm_space, quad));
  return out;
}

double drift_power_integral(const MildSolution& sol, double r0) {
  if (!(r0 > 0.0)) throw ParameterError("r0 must be > 0");
  const Trajectory& tr = sol.trajectory;
  double prev_s = tr.t_origin;
  double prev_f = std::pow(sol.initial_drift_sup, r0);
  double total = 0.0;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    const double f = std::pow(tr.diagnostics[j].drift_sup, r0);
    total += 0.5 * (tr.stamps[j] - prev_s) * (f + prev_f);
    prev_s = tr.stamps[j];
    prev_f = f;
  }
  return total;
}

std::pair<double, double> trajectory_distance(const Trajectory& a, const Trajectory& b, const BesovIndex& space,
                                              double theta, int norm_nodes) {
  ThermicQuadrature quad;
  quad.nodes = norm_nodes;
  double weighted = 0.0;
  double l1 = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (k < b.size() && b.stamps[k] < a.stamps[i] - 1e-12) ++k;
    if (k >= b.size()) break;
    if (std::abs(b.stamps[k] - a.stamps[i]) > 1e-12) continue;
    require_same_grid(a.densities[i].grid, b.densities[k].grid, "trajectory_distance");
    const ScalarField diff(a.densities[i].grid, a.densities[i].values - b.densities[k].values);
    weighted = std::max(weighted, weight(a.stamps[i], a.t_origin, theta) * thermic_norm(diff, space, quad));
    l1 = std::max(l1, lebesgue_norm(diff.values, 1.0, diff.grid.cell_volume()));
  }
  return {weighted, l1};
}

std::vector<EpsilonRow> epsilon_stability(const SolverConfig& cfg, const std::vector<double>& eps_list) {
  if (eps_list.size() < 3) throw ParameterError("epsilon stability needs at least 3 scales");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ParameterError("epsilon list must be strictly decreasing");
  std::vector<std::optional<MildSolution>> sols;
  std::vector<std::string> errors;
  for (double eps : eps_list) {
    SolverConfig c = cfg;
    c.kernel.epsilon = eps;
    c.record_history = false;
    try {
      MildSolution s = solve_mild(c);
      if (s.trajectory.status != RunStatus::Converged) {
        errors.push_back(s.message);
        sols.emplace_back();
      } else {
        errors.emplace_back();
        sols.emplace_back(std::move(s));
      }
    } catch (const Error& e) {
      errors.emplace_back(e.what());
      sols.emplace_back();
    }
  }
  std::vector<EpsilonRow> rows;
  for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
    EpsilonRow row;
    row.eps_a = eps_list[i];
    row.eps_b = eps_list[i + 1];
    if (!sols[i] || !sols[i + 1]) {
      row.failed = true;
      row.reason = !sols[i] ? errors[i] : errors[i + 1];
    } else {
      const auto [w, l1] = trajectory_distance(sols[i]->trajectory, sols[i + 1]->trajectory, sols[i]->norm_space,
                                               sols[i]->theta, cfg.norm_nodes);
      row.weighted = w;
      row.l1 = l1;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mkv
