#pragma once

#include <vector>

#include "mkv/grid.hpp"

namespace mkv {

struct StampDiagnostics {
  double mass = 0.0;
  double min_value = 0.0;
  double weighted_norm = 0.0;
  int picard_iters = 0;
  double drift_sup = 0.0;
};

enum class RunStatus { Converged, Blowup, MaxIters };

const char* to_string(RunStatus status);

/// Time-stamped densities. Stamps are strictly increasing and lie after
/// t_origin; every density lives on the same grid.
struct Trajectory {
  double t_origin = 0.0;
  std::vector<double> stamps;
  std::vector<ScalarField> densities;
  std::vector<StampDiagnostics> diagnostics;
  RunStatus status = RunStatus::Converged;
  double blowup_time = 0.0;

  std::size_t size() const { return stamps.size(); }
  bool empty() const { return stamps.empty(); }
};

}  // namespace mkv
