#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mkv/grid.hpp"
#include "mkv/kernels.hpp"
#include "mkv/stable_noise.hpp"

namespace mkv {

struct ParticleConfig {
  Eigen::Index n_particles = 1000;
  double dt = 0.01;
  double horizon = 0.5;            // S - t
  KernelSpec kernel;
  StableParams noise = StableParams::isotropic(2.0);
  ScalarField mu0;                 // sampled through an inverse-CDF table; also fixes the grid
  std::uint64_t seed = 1;
  double kde_bandwidth = 0.0;      // 0 selects the Silverman rule
  int snapshots = 1;               // equally spaced in steps, the last at the horizon
  Eigen::Index direct_max = 10000; // direct pairwise sum up to this many particles

  static constexpr Eigen::Index kMaxParticles = Eigen::Index{1} << 25;

  void validate() const;
  int steps() const;
};

struct ParticleSnapshot {
  double time = 0.0;
  Eigen::MatrixXd positions;       // n x d
  ScalarField density;             // kernel density estimate
};

struct ParticleRun {
  std::vector<ParticleSnapshot> snapshots;
  double bandwidth = 0.0;          // of the last snapshot
  Kernel kernel;
};

/// Child seed derived from (seed, purpose, index) by a fixed hash.
std::uint64_t child_seed(std::uint64_t seed, const char* purpose, std::uint64_t index = 0);

/// n draws from the grid density (cell chosen by cumulative weight, uniform inside the cell).
Eigen::MatrixXd sample_initial(const ScalarField& density, Eigen::Index n, std::uint64_t seed);

/// Empirical drift (1/n) sum_j b(X_i - X_j) by linear interpolation of the
/// gridded kernel with periodic (minimum-image) differences when
/// n <= direct_max, otherwise by cloud-in-cell deposit, spectral convolution and
/// interpolation back to the particles.
Eigen::MatrixXd empirical_drift(const VectorField& b, const Eigen::MatrixXd& positions, Eigen::Index direct_max);

/// Euler scheme X <- X + B(X) dt + dW on the torus. Deterministic in cfg.seed.
/// With a permutation, particle i starts from the initial draw perm[i] and
/// receives increment row perm[i] at every step.
ParticleRun simulate(const ParticleConfig& cfg, const std::vector<Eigen::Index>* permutation = nullptr);

/// Silverman bandwidth 1.06 sigma n^(-1/(d+4)), sigma the mean per-axis
/// deviation, clamped to at least the grid spacing.
double silverman_bandwidth(const Eigen::MatrixXd& positions, const GridSpec& grid);

/// Cloud-in-cell deposit smoothed by a Gaussian of the given bandwidth (>= h).
ScalarField empirical_density(const Eigen::MatrixXd& positions, double bandwidth, const GridSpec& grid);

/// Positions wrapped into [-L, L)^d.
void wrap_positions(Eigen::MatrixXd& positions, const GridSpec& grid);

struct FieldDistance {
  double l1 = 0.0;
  double sup = 0.0;
};

FieldDistance compare_to_pde(const ScalarField& particle_density, const ScalarField& pde_density);

}  // namespace mkv
