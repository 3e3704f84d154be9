#include "mkv/app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "mkv/besov.hpp"
#include "mkv/config.hpp"
#include "mkv/criteria.hpp"
#include "mkv/kernels.hpp"
#include "mkv/particles.hpp"
#include "mkv/solver.hpp"

namespace mkv {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string numbered(const char* stem, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.csv", stem, k);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << text;
}

fs::path output_dir(const ExperimentConfig& cfg, const RunOptions& opt) {
  fs::path dir = opt.out_dir;
  if (dir.empty()) dir = cfg.path("output", "dir");
  if (dir.empty()) dir = "mkv_out";
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig load(const RunOptions& opt, std::ostream& err) {
  if (opt.config.empty()) throw ParameterError("--config is required");
  ExperimentConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.set("particles", "seed", static_cast<std::int64_t>(*opt.seed));
  for (const auto& w : cfg.warnings) err << "warning: " << w << "\n";
  return cfg;
}

int cmd_check(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load(opt, err);
  const ConditionReport rep = evaluate_conditions(indices_from(cfg));
  out << format_report(rep);
  return opt.strict && !rep.weak() ? kExitCondition : kExitOk;
}

// Stamp indices of k equally spaced snapshots, the last one at the final stamp.
std::vector<std::size_t> snapshot_indices(std::size_t stamps, std::size_t k) {
  std::vector<std::size_t> out;
  if (stamps == 0) return out;
  for (std::size_t j = 1; j <= k; ++j) {
    const std::size_t i = std::max<std::size_t>(1, (j * stamps + k / 2) / k) - 1;
    if (out.empty() || out.back() != i) out.push_back(i);
  }
  return out;
}

int cmd_fp_solve(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load(opt, err);
  SolverConfig sc = solver_from(cfg);
  sc.force = opt.force;
  const fs::path dir = output_dir(cfg, opt);
  const MildSolution sol = solve_mild(sc);
  const Trajectory& tr = sol.trajectory;

  std::ostringstream diag;
  diag << "s,mass,min_value,weighted_norm,picard_iters,drift_sup\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const StampDiagnostics& g = tr.diagnostics[k];
    diag << num(tr.stamps[k]) << "," << num(g.mass) << "," << num(g.min_value) << "," << num(g.weighted_norm) << ","
         << g.picard_iters << "," << num(g.drift_sup) << "\n";
  }
  write_text(dir / "diagnostics.csv", diag.str());

  std::ostringstream manifest;
  manifest << "index,s,file\n";
  write_csv(sc.mu0, dir / numbered("density", 0));
  manifest << "0," << num(sc.t_start) << "," << numbered("density", 0) << "\n";
  const auto picks = snapshot_indices(tr.size(), static_cast<std::size_t>(cfg.integer("solver", "snapshots", 4)));
  for (std::size_t j = 0; j < picks.size(); ++j) {
    write_csv(tr.densities[picks[j]], dir / numbered("density", j + 1));
    manifest << j + 1 << "," << num(tr.stamps[picks[j]]) << "," << numbered("density", j + 1) << "\n";
  }
  write_text(dir / "snapshots.csv", manifest.str());

  std::ostringstream summary;
  summary << "status: " << to_string(tr.status) << "\n"
          << "t_start: " << num(sc.t_start) << "\n"
          << "horizon_end: " << num(sc.horizon_end) << "\n"
          << "stamps: " << tr.size() << "\n"
          << "final_time: " << num(tr.empty() ? sc.t_start : tr.stamps.back()) << "\n"
          << "windows: " << sol.windows << "\n"
          << "refinements: " << sol.refinements << "\n"
          << "theta: " << num(sol.theta) << "\n"
          << "norm_space: B^" << num(sol.norm_space.gamma) << "_{" << num(sol.norm_space.ell) << ","
          << num(sol.norm_space.m) << "}\n";
  if (tr.status == RunStatus::Blowup) summary << "blowup_time: " << num(tr.blowup_time) << "\n";
  if (!sol.message.empty()) summary << "message: " << sol.message << "\n";
  summary << format_report(sol.report);
  write_text(dir / "summary.txt", summary.str());

  out << "fp-solve " << to_string(tr.status) << ": " << tr.size() << " stamps to s=" << (tr.empty() ? sc.t_start : tr.stamps.back())
      << ", " << picks.size() + 1 << " snapshots in " << dir.string() << "\n";
  return tr.status == RunStatus::Converged ? kExitOk : kExitNumerical;
}

struct PdeSnapshot {
  double s;
  fs::path file;
};

std::vector<PdeSnapshot> read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "snapshots.csv");
  if (!in) throw ParameterError("no snapshots.csv in " + dir.string());
  std::string line;
  std::getline(in, line);
  std::vector<PdeSnapshot> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string idx, s, file;
    std::getline(ss, idx, ',');
    std::getline(ss, s, ',');
    std::getline(ss, file);
    out.push_back({std::stod(s), dir / file});
  }
  return out;
}

int cmd_particles(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load(opt, err);
  const ParticleConfig pc = particles_from(cfg);
  const fs::path dir = output_dir(cfg, opt);
  const ParticleRun run = simulate(pc);
  const double t0 = cfg.real("solver", "t_start", 0.0);

  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const ParticleSnapshot& snap = run.snapshots[k];
    std::ostringstream pos;
    pos << "id";
    for (int a = 0; a < pc.mu0.grid.d; ++a) pos << ",x" << a + 1;
    pos << "\n";
    for (Eigen::Index i = 0; i < snap.positions.rows(); ++i) {
      pos << i;
      for (int a = 0; a < pc.mu0.grid.d; ++a) pos << "," << num(snap.positions(i, a));
      pos << "\n";
    }
    write_text(dir / numbered("positions", k + 1), pos.str());
    write_csv(snap.density, dir / numbered("kde", k + 1));
  }

  std::string verdict;
  if (cfg.has("particles", "pde_dir")) {
    const auto pde = read_manifest(cfg.path("particles", "pde_dir"));
    std::ostringstream report;
    report << "s,l1,sup\n";
    std::size_t matched = 0;
    for (const ParticleSnapshot& snap : run.snapshots) {
      const double s = t0 + snap.time;
      for (const PdeSnapshot& p : pde) {
        if (std::abs(p.s - s) > 0.5 * pc.dt) continue;
        const FieldDistance dist = compare_to_pde(snap.density, read_scalar_csv(p.file));
        report << num(s) << "," << num(dist.l1) << "," << num(dist.sup) << "\n";
        verdict = ", final l1=" + num(dist.l1);
        ++matched;
        break;
      }
    }
    if (matched == 0) throw ParameterError("no fp-solve snapshot matches a particle snapshot time");
    write_text(dir / "comparison.csv", report.str());
  }
  out << "particles: n=" << pc.n_particles << ", " << pc.steps() << " steps, " << run.snapshots.size()
      << " snapshots, bandwidth=" << run.bandwidth << verdict << "\n";
  return kExitOk;
}

int cmd_besov(const RunOptions& opt, std::ostream& out) {
  if (opt.field.empty()) throw ParameterError("--field is required");
  const ScalarField f = read_scalar_csv(opt.field);
  BesovIndex idx{opt.gamma, opt.ell, opt.m};
  const ThermicResult r = thermic_norm_detail(f, idx);
  out << num(r.norm) << "," << num(opt.gamma) << "," << num(opt.ell) << "," << num(opt.m) << ","
      << num(r.tail_estimate) << "\n";
  return kExitOk;
}

int cmd_kernels(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load(opt, err);
  const GridSpec grid = grid_from(cfg);
  const Kernel k = build_kernel(kernel_from(cfg), grid);
  const fs::path dir = output_dir(cfg, opt);
  write_csv(k.b, dir / "b.csv");
  write_csv(k.div_b, dir / "div_b.csv");
  out << "kernels: " << to_string(k.kind) << " eps=" << num(k.epsilon) << ", |b|_inf=" << num(k.b.values.abs().maxCoeff())
      << " written to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_compare(const RunOptions& opt, std::ostream& out) {
  if (opt.lhs.empty() || opt.rhs.empty()) throw ParameterError("--lhs and --rhs are required");
  const FieldDistance d = compare_to_pde(read_scalar_csv(opt.lhs), read_scalar_csv(opt.rhs));
  out << "l1,sup\n" << num(d.l1) << "," << num(d.sup) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::string& sub, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    thread_budget();
    if (sub == "check") return cmd_check(opt, out, err);
    if (sub == "fp-solve") return cmd_fp_solve(opt, out, err);
    if (sub == "particles") return cmd_particles(opt, out, err);
    if (sub == "besov") return cmd_besov(opt, out);
    if (sub == "kernels") return cmd_kernels(opt, out, err);
    if (sub == "compare") return cmd_compare(opt, out);
    err << "error: unknown subcommand '" << sub << "'\n";
    return kExitInput;
  } catch (const ConfigError& e) {
    err << "config error (" << to_string(e.kind) << "): " << e.what() << "\n";
    return kExitInput;
  } catch (const ConditionError& e) {
    err << "condition failure: " << e.what() << "\n";
    return kExitCondition;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ResolutionError& e) {
    err << "resolution error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: malformed number: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace mkv
