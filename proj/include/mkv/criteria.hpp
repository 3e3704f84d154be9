#pragma once

#include <limits>
#include <string>

namespace mkv {

/// Integrability/regularity of the kernel b in L^r(B^beta_{p,q}) and of the
/// initial law mu in B^beta0_{p0,q0}. Exponents may be +infinity.
struct LebesgueBesovIndices {
  double r = std::numeric_limits<double>::infinity();
  double p = 1.0;
  double q = std::numeric_limits<double>::infinity();
  double beta = 0.0;
  double p0 = 1.0;
  double q0 = std::numeric_limits<double>::infinity();
  double beta0 = 0.0;
  int d = 1;
  double alpha = 2.0;
  double eta = 0.01;
  bool has_div_bound = false;

  void validate() const;
};

struct OpenInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool empty() const { return !(lower < upper); }
  bool contains(double x) const { return lower < x && x < upper; }
  double midpoint() const { return 0.5 * (lower + upper); }
};

struct ConditionReport {
  double intrinsic_index = 0.0;
  bool c0 = false;
  bool c0_s = false;
  bool c1 = false;
  bool c2 = false;
  bool c1_s = false;
  bool c2_s = false;
  std::string c2_reason;
  /// Which expression of the max in the strong beta in (-1, 0] condition is larger:
  /// "jump" for the 2 - 3a/2 branch, "drift" for the weak-condition branch.
  std::string c1_s_branch;

  double indicator = 0.0;      // 1 when beta in (-1, 0], else 0
  double zeta0 = 0.0;
  double Gamma = 0.0;
  double theta = 0.0;
  OpenInterval r0_window;
  double margin = 0.0;         // beta minus the left side of the deciding weak condition
  double eta = 0.0;            // slack actually used
  double eta_max = 0.0;        // sup of the eta keeping Gamma > 0 and theta > 0
  bool eta_clamped = false;

  bool weak() const { return c1 || c2; }
  bool strong() const { return c1_s || c2_s; }
};

/// beta0 + d (1 - 1/p0).
double intrinsic_index(double beta0, double p0, int d);

/// Evaluates every well-posedness condition and the exponents zeta0, Gamma,
/// theta and the r0 window. A configured eta at or above eta_max is replaced
/// by eta_max / 2 and flagged.
ConditionReport evaluate_conditions(const LebesgueBesovIndices& idx);

/// key: value lines.
std::string format_report(const ConditionReport& report);

enum class ModelKind { Burgers, Vortex2D, KellerSegel };

struct ModelVerdict {
  bool weak = false;
  bool strong = false;
  std::string binding_inequality;
  double best_p = 1.0;   // Burgers only: p of the kernel space at which the weak verdict was read
};

ModelVerdict model_thresholds(ModelKind model, double alpha, int d, double beta0, double p0);

const char* to_string(ModelKind model);

}  // namespace mkv
