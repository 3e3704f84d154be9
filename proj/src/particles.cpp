#include "mkv/particles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <random>
#include <thread>

#include "mkv/spectral.hpp"

namespace mkv {

namespace {

using cd = std::complex<double>;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Stencil {
  Eigen::Index index[8];
  double weight[8];
  int count = 0;
};

// Multilinear weights of the 2^d grid nodes around x on the periodic grid.
inline void stencil(const GridSpec& g, const double* x, Stencil& st) {
  const double h = g.spacing();
  const int n = g.points;
  int base[3];
  double frac[3];
  for (int a = 0; a < g.d; ++a) {
    const double u = (x[a] + g.half_width) / h;
    const double fl = std::floor(u);
    frac[a] = u - fl;
    int i = static_cast<int>(static_cast<long long>(fl) % n);
    if (i < 0) i += n;
    base[a] = i;
  }
  st.count = 1 << g.d;
  for (int c = 0; c < st.count; ++c) {
    Eigen::Index flat = 0;
    double w = 1.0;
    for (int a = 0; a < g.d; ++a) {
      const int bit = (c >> (g.d - 1 - a)) & 1;
      int i = base[a] + bit;
      if (i == n) i = 0;
      flat = flat * n + i;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    st.index[c] = flat;
    st.weight[c] = w;
  }
}

Eigen::ArrayXd deposit(const Eigen::MatrixXd& pos, const GridSpec& g) {
  Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(g.size());
  const double unit = 1.0 / (static_cast<double>(pos.rows()) * g.cell_volume());
  Stencil st;
  double x[3];
  for (Eigen::Index i = 0; i < pos.rows(); ++i) {
    for (int a = 0; a < g.d; ++a) x[a] = pos(i, a);
    stencil(g, x, st);
    for (int c = 0; c < st.count; ++c) mass(st.index[c]) += unit * st.weight[c];
  }
  return mass;
}

}  // namespace

std::uint64_t child_seed(std::uint64_t seed, const char* purpose, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* p = purpose; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ULL;
  }
  return splitmix(splitmix(seed ^ h) + index);
}

void ParticleConfig::validate() const {
  if (n_particles < 100) throw ParameterError("particle count must be >= 100");
  if (n_particles > kMaxParticles) throw ParameterError("particle count exceeds the memory budget");
  if (!(dt > 0.0)) throw ParameterError("particle dt must be > 0");
  if (!(horizon > 0.0)) throw ParameterError("particle horizon must be > 0");
  if (dt > horizon / 10.0 * (1.0 + 1e-12)) throw ParameterError("particle dt must be <= horizon / 10");
  if (kde_bandwidth < 0.0) throw ParameterError("KDE bandwidth must be > 0 (or 0 for auto)");
  if (snapshots < 1) throw ParameterError("at least one particle snapshot is required");
  mu0.grid.validate();
  if (mu0.values.size() != mu0.grid.size()) throw ParameterError("initial density does not match its grid");
  if (mu0.values.minCoeff() < -1e-12) throw ParameterError("initial density must be non-negative");
  if (!(mu0.integral() > 0.0)) throw ParameterError("initial density has no mass");
  if (kde_bandwidth > 0.0 && kde_bandwidth < mu0.grid.spacing()) throw ParameterError("KDE bandwidth must be >= h");
  kernel.validate();
}

int ParticleConfig::steps() const { return static_cast<int>(std::llround(std::ceil(horizon / dt - 1e-9))); }

Eigen::MatrixXd sample_initial(const ScalarField& density, Eigen::Index n, std::uint64_t seed) {
  const GridSpec& g = density.grid;
  std::vector<double> cdf(static_cast<std::size_t>(g.size()));
  double acc = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    acc += std::max(density.values(k), 0.0);
    cdf[static_cast<std::size_t>(k)] = acc;
  }
  if (!(acc > 0.0)) throw ParameterError("cannot sample from a density without mass");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double h = g.spacing();
  Eigen::MatrixXd out(n, g.d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = unif(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    Eigen::Index flat = it - cdf.begin();
    for (int a = g.d - 1; a >= 0; --a) {
      const int k = static_cast<int>(flat % g.points);
      flat /= g.points;
      out(i, a) = g.coordinate(k) + (unif(rng) - 0.5) * h;
    }
  }
  wrap_positions(out, g);
  return out;
}

void wrap_positions(Eigen::MatrixXd& positions, const GridSpec& grid) {
  const double L = grid.half_width;
  const double period = 2.0 * L;
  for (Eigen::Index i = 0; i < positions.size(); ++i) {
    double& x = positions.data()[i];
    if (x < -L || x >= L) {
      x = std::fmod(x + L, period);
      if (x < 0.0) x += period;
      x -= L;
      if (x >= L) x -= period;
    }
  }
}

Eigen::MatrixXd empirical_drift(const VectorField& b, const Eigen::MatrixXd& positions, Eigen::Index direct_max) {
  const GridSpec& g = b.grid;
  const Eigen::Index n = positions.rows();
  const int d = g.d;
  if (positions.cols() != d) throw ParameterError("particle dimension does not match the kernel grid");
  Eigen::MatrixXd drift = Eigen::MatrixXd::Zero(n, b.components());
  Stencil st;
  double x[3];
  if (n <= direct_max) {
    const double* bv = b.values.data();
    const Eigen::Index stride = b.values.rows();
    const int comps = b.components();
    auto rows = [&](Eigen::Index lo, Eigen::Index hi) {
      Stencil sl;
      double y[3];
      for (Eigen::Index i = lo; i < hi; ++i) {
        double acc[3] = {0.0, 0.0, 0.0};
        for (Eigen::Index j = 0; j < n; ++j) {
          for (int a = 0; a < d; ++a) y[a] = positions(i, a) - positions(j, a);
          stencil(g, y, sl);
          for (int c = 0; c < sl.count; ++c)
            for (int k = 0; k < comps; ++k) acc[k] += sl.weight[c] * bv[k * stride + sl.index[c]];
        }
        for (int k = 0; k < comps; ++k) drift(i, k) = acc[k] / static_cast<double>(n);
      }
    };
    const Eigen::Index workers = std::min<Eigen::Index>(thread_budget(), std::max<Eigen::Index>(1, n / 256));
    if (workers <= 1) {
      rows(0, n);
    } else {
      std::vector<std::thread> pool;
      for (Eigen::Index w = 0; w < workers; ++w) pool.emplace_back(rows, n * w / workers, n * (w + 1) / workers);
      for (auto& t : pool) t.join();
    }
    return drift;
  }
  const Spectral& sp = spectral_for(g);
  const Eigen::ArrayXcd rhat = sp.forward(deposit(positions, g));
  Eigen::ArrayXXd field(g.size(), b.components());
  for (int k = 0; k < b.components(); ++k) field.col(k) = sp.inverse(sp.forward(b.values.col(k)) * rhat);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) x[a] = positions(i, a);
    stencil(g, x, st);
    for (int c = 0; c < st.count; ++c)
      for (int k = 0; k < b.components(); ++k) drift(i, k) += st.weight[c] * field(st.index[c], k);
  }
  return drift;
}

double silverman_bandwidth(const Eigen::MatrixXd& positions, const GridSpec& grid) {
  const Eigen::Index n = positions.rows();
  double sigma = 0.0;
  for (int a = 0; a < grid.d; ++a) {
    const double mean = positions.col(a).mean();
    const double var = (positions.col(a).array() - mean).square().sum() / std::max<Eigen::Index>(n - 1, 1);
    sigma += std::sqrt(var);
  }
  sigma /= grid.d;
  const double bw = 1.06 * sigma * std::pow(static_cast<double>(n), -1.0 / (grid.d + 4));
  return std::max(bw, grid.spacing());
}

ScalarField empirical_density(const Eigen::MatrixXd& positions, double bandwidth, const GridSpec& grid) {
  if (positions.rows() < 1) throw ParameterError("empirical density needs at least one particle");
  if (bandwidth < grid.spacing() * (1.0 - 1e-12)) throw ParameterError("KDE bandwidth must be >= h");
  Eigen::MatrixXd pos = positions;
  wrap_positions(pos, grid);
  const Spectral& sp = spectral_for(grid);
  const Eigen::ArrayXd smooth = (-0.5 * bandwidth * bandwidth * sp.wavenumber_norm2()).exp();
  return ScalarField(grid, sp.inverse(sp.forward(deposit(pos, grid)) * smooth.cast<cd>()));
}

ParticleRun simulate(const ParticleConfig& cfg, const std::vector<Eigen::Index>* permutation) {
  cfg.validate();
  const GridSpec& g = cfg.mu0.grid;
  const Eigen::Index n = cfg.n_particles;
  if (permutation && static_cast<Eigen::Index>(permutation->size()) != n)
    throw ParameterError("permutation length does not match the particle count");
  ParticleRun run;
  run.kernel = build_kernel(cfg.kernel, g);
  const bool zero_kernel = cfg.kernel.kind == KernelKind::Zero;

  const Eigen::MatrixXd draws = sample_initial(cfg.mu0, n, child_seed(cfg.seed, "initial"));
  Eigen::MatrixXd x(n, g.d);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = draws.row(permutation ? (*permutation)[static_cast<std::size_t>(i)] : i);

  const int steps = cfg.steps();
  std::vector<int> marks;
  for (int k = 1; k <= cfg.snapshots; ++k)
    marks.push_back(static_cast<int>(std::llround(static_cast<double>(k) * steps / cfg.snapshots)));

  auto record = [&](int step) {
    ParticleSnapshot snap;
    snap.time = std::min(step * cfg.dt, cfg.horizon);
    snap.positions = x;
    run.bandwidth = cfg.kde_bandwidth > 0.0 ? cfg.kde_bandwidth : silverman_bandwidth(x, g);
    snap.density = empirical_density(x, run.bandwidth, g);
    run.snapshots.push_back(std::move(snap));
  };

  std::size_t next_mark = 0;
  for (int step = 1; step <= steps; ++step) {
    const double h = std::min(cfg.dt, cfg.horizon - (step - 1) * cfg.dt);
    const Eigen::MatrixXd noise = sample_increments(cfg.noise, g.d, h, n, child_seed(cfg.seed, "increments", step));
    if (!zero_kernel) x += h * empirical_drift(run.kernel.b, x, cfg.direct_max);
    if (permutation) {
      for (Eigen::Index i = 0; i < n; ++i) x.row(i) += noise.row((*permutation)[static_cast<std::size_t>(i)]);
    } else {
      x += noise;
    }
    wrap_positions(x, g);
    if (!x.allFinite()) throw NumericalError("particle positions became non-finite");
    while (next_mark < marks.size() && marks[next_mark] == step) {
      record(step);
      ++next_mark;
    }
  }
  return run;
}

FieldDistance compare_to_pde(const ScalarField& particle_density, const ScalarField& pde_density) {
  require_same_grid(particle_density.grid, pde_density.grid, "compare");
  const Eigen::ArrayXd diff = particle_density.values - pde_density.values;
  return {lebesgue_norm(diff, 1.0, particle_density.grid.cell_volume()), diff.abs().maxCoeff()};
}

}  // namespace mkv
