#pragma once

#include <string>
#include <vector>

#include "mkv/besov.hpp"
#include "mkv/criteria.hpp"
#include "mkv/grid.hpp"
#include "mkv/kernels.hpp"
#include "mkv/stable_noise.hpp"
#include "mkv/trajectory.hpp"

namespace mkv {

/// Raised when the well-posedness conditions fail and the run was not forced.
struct ConditionError : Error {
  using Error::Error;
};

struct SolverConfig {
  double t_start = 0.0;
  double horizon_end = 1.0;        // S
  int mesh_intervals = 64;         // M
  double grading = 1.0;            // nodes t + (S - t)(k / M)^g
  double picard_tol = 1e-6;
  int picard_max = 60;
  KernelSpec kernel;
  StableParams noise = StableParams::isotropic(2.0);
  LebesgueBesovIndices indices;
  ScalarField mu0;
  double blowup_threshold = 0.0;   // 0 selects 1e3 * max mu0
  double mass_tolerance = 0.01;
  double vartheta = 0.9;
  bool force = false;
  bool record_history = true;
  int norm_nodes = 64;             // v-nodes of the thermic norms used for defects
  int max_refinements = 16;        // interval halvings allowed when one step fails to contract

  void validate() const;
  double effective_blowup_threshold() const;
};

struct PicardRecord {
  int window = 0;
  int iteration = 0;
  double defect = 0.0;
  double weighted_norm = 0.0;      // of the new iterate; 0 unless history is recorded
  bool relaxed = false;
};

struct MildSolution {
  Trajectory trajectory;
  ConditionReport report;
  BesovIndex norm_space;           // B^{-beta + vartheta Gamma}_{p', 1}
  double theta = 0.0;
  std::vector<PicardRecord> history;
  int windows = 0;
  int refinements = 0;
  double initial_drift_sup = 0.0;
  std::string message;
};

/// Mesh t + (S - t)(k / M)^g for k = 0..M.
std::vector<double> time_mesh(const SolverConfig& cfg);

/// B = b * rho componentwise on the torus.
VectorField drift_field(const VectorField& b, const ScalarField& rho);

/// rho^0(s) = p_{s-t} * mu on the mesh stamps after t.
Trajectory free_evolution(const SolverConfig& cfg);

/// One Picard update of the Duhamel map over the whole mesh of cfg, with the
/// nonlinear term integrated exactly against the semigroup for piecewise-linear
/// time dependence between stamps.
Trajectory duhamel_step(const Trajectory& previous, const SolverConfig& cfg);

/// Picard iteration to the mild solution. Tries the full horizon first and
/// falls back to marching over shorter windows (and halving single steps)
/// when the iteration does not contract. Throws ConditionError when neither
/// weak condition holds and cfg.force is false.
MildSolution solve_mild(const SolverConfig& cfg);

/// (s - t)^theta |Phi(rho)(s) - rho(s)|_{norm_space} per stamp, Phi the Duhamel map.
std::vector<double> duhamel_residual(const MildSolution& sol, const SolverConfig& cfg);

/// Trapezoid approximation of int_t^S |B_rho(s)|_inf^r0 ds over the stamps.
double drift_power_integral(const MildSolution& sol, double r0);

struct EpsilonRow {
  double eps_a = 0.0;
  double eps_b = 0.0;
  double weighted = 0.0;
  double l1 = 0.0;
  bool failed = false;
  std::string reason;
};

/// Solves once per eps and compares consecutive entries on the common stamps.
std::vector<EpsilonRow> epsilon_stability(const SolverConfig& cfg, const std::vector<double>& eps_list);

/// Largest (s - t)^theta weighted distance and largest L^1 distance between two
/// trajectories over their common stamps.
std::pair<double, double> trajectory_distance(const Trajectory& a, const Trajectory& b, const BesovIndex& space,
                                              double theta, int norm_nodes);

}  // namespace mkv
