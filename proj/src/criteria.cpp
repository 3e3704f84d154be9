#include "mkv/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

#include "mkv/grid.hpp"

namespace mkv {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

bool exponent_ok(double p) { return std::isinf(p) ? p > 0 : p >= 1.0; }

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void LebesgueBesovIndices::validate() const {
  if (!exponent_ok(r) || !exponent_ok(p) || !exponent_ok(q)) throw ParameterError("r, p, q must lie in [1, inf]");
  if (!exponent_ok(p0) || !exponent_ok(q0)) throw ParameterError("p0, q0 must lie in [1, inf]");
  if (!(beta >= -1.0 && beta <= 0.0)) throw ParameterError("beta must lie in [-1, 0]");
  if (!(beta0 >= 0.0) || !std::isfinite(beta0)) throw ParameterError("beta0 must be >= 0");
  if (d < 1 || d > 3) throw ParameterError("dimension must be 1, 2 or 3");
  if (!(alpha > 1.0 && alpha <= 2.0)) throw ParameterError("alpha must lie in (1, 2]");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be > 0");
}

double intrinsic_index(double beta0, double p0, int d) { return beta0 + d * (1.0 - inv(p0)); }

ConditionReport evaluate_conditions(const LebesgueBesovIndices& idx) {
  idx.validate();
  ConditionReport rep;
  const double a = idx.alpha;
  const double b = idx.beta;
  const double dp = idx.d * inv(idx.p);
  const double ar = a * inv(idx.r);
  const double intr = intrinsic_index(idx.beta0, idx.p0, idx.d);
  rep.intrinsic_index = intr;
  const bool regular = b > -1.0;
  rep.indicator = regular ? 1.0 : 0.0;

  const double gap = -b + dp - intr;
  if (regular) {
    rep.c0 = 1.0 - a + dp + ar < b;
    rep.c0_s = 2.0 - 1.5 * a + dp + ar < b;
    const double weak_lhs = 1.0 - a + ar + std::max(gap, 0.0);
    const double jump_lhs = 2.0 - 1.5 * a + ar + gap;
    rep.c1 = weak_lhs < b;
    rep.c1_s = std::max(jump_lhs, weak_lhs) < b;
    rep.c1_s_branch = jump_lhs >= weak_lhs ? "jump" : "drift";
    rep.margin = b - weak_lhs;
    rep.c2_reason = "beta > -1: the beta = -1 condition does not apply";
  } else {
    const double s1 = (a - 1.0) - ar;
    const double s2 = -1.0 - (1.0 - a + ar + dp - intr);
    const double s3 = intr - dp;
    rep.margin = std::min({s1, s2, s3});
    if (!idx.has_div_bound) {
      rep.c2 = false;
      rep.c2_reason = "missing div(b) structure condition";
    } else {
      rep.c2 = s1 > 0.0 && s2 > 0.0 && s3 > 0.0;
      rep.c2_s = rep.c2 && (2.0 - 1.5 * a + ar + dp - intr < -1.0);
      rep.c2_reason = rep.c2 ? "" : "inequality not satisfied";
    }
  }

  const double ind = rep.indicator;
  rep.zeta0 = gap / a;
  const double gamma0 = a + b * ind - 1.0 - ar - a * rep.zeta0;
  const double theta0 = 1.0 - (1.0 - b * ind) / a - inv(idx.r);
  rep.eta_max = std::min(gamma0, a * theta0);
  rep.eta = idx.eta;
  if (rep.eta_max > 0.0 && idx.eta >= rep.eta_max) {
    rep.eta = 0.5 * rep.eta_max;
    rep.eta_clamped = true;
  }
  rep.Gamma = gamma0 - rep.eta;
  rep.theta = theta0 - rep.eta / a;

  const double denom = a - (1.0 - b * ind);
  rep.r0_window.lower = denom > 0.0 ? a / denom : kInfinity;
  if (std::isinf(idx.r))
    rep.r0_window.upper = rep.theta > 0.0 ? 1.0 / rep.theta : kInfinity;
  else
    rep.r0_window.upper = (1.0 + idx.r * rep.theta) > 0.0 ? idx.r / (1.0 + idx.r * rep.theta) : kInfinity;
  return rep;
}

std::string format_report(const ConditionReport& r) {
  std::ostringstream os;
  auto yes = [](bool v) { return v ? "true" : "false"; };
  os << "intrinsic_index: " << fmt(r.intrinsic_index) << "\n"
     << "c0: " << yes(r.c0) << "\n"
     << "c0_s: " << yes(r.c0_s) << "\n"
     << "c1: " << yes(r.c1) << "\n"
     << "c2: " << yes(r.c2) << "\n"
     << "c1_s: " << yes(r.c1_s) << "\n"
     << "c2_s: " << yes(r.c2_s) << "\n";
  if (!r.c1_s_branch.empty()) os << "c1_s_binding: " << r.c1_s_branch << "\n";
  if (!r.c2_reason.empty()) os << "c2_reason: " << r.c2_reason << "\n";
  os << "weak: " << yes(r.weak()) << "\n"
     << "strong: " << yes(r.strong()) << "\n"
     << "zeta0: " << fmt(r.zeta0) << "\n"
     << "Gamma: " << fmt(r.Gamma) << "\n"
     << "theta: " << fmt(r.theta) << "\n"
     << "r0_window: (" << fmt(r.r0_window.lower) << ", " << fmt(r.r0_window.upper) << ")"
     << (r.r0_window.empty() ? " empty" : "") << "\n"
     << "margin: " << fmt(r.margin) << "\n"
     << "eta: " << fmt(r.eta) << "\n"
     << "eta_max: " << fmt(r.eta_max) << "\n"
     << "eta_clamped: " << yes(r.eta_clamped) << "\n";
  return os.str();
}

const char* to_string(ModelKind model) {
  switch (model) {
    case ModelKind::Burgers: return "burgers";
    case ModelKind::Vortex2D: return "vortex";
    case ModelKind::KellerSegel: return "keller-segel";
  }
  return "unknown";
}

ModelVerdict model_thresholds(ModelKind model, double alpha, int d, double beta0, double p0) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw ParameterError("alpha must lie in (1, 2]");
  if (!(beta0 >= 0.0)) throw ParameterError("beta0 must be >= 0");
  if (!exponent_ok(p0)) throw ParameterError("p0 must lie in [1, inf]");
  ModelVerdict v;
  switch (model) {
    case ModelKind::Burgers: {
      if (d != 1) throw ParameterError("the Burgers model lives in dimension 1");
      const double intr = intrinsic_index(beta0, p0, 1);
      const double lhs = 1.0 - alpha + std::max(1.0 - intr, 0.0);
      // kernel 1/2 delta_0 lies in B^{-1/p'}_{p,inf} for every p
      std::vector<double> grid;
      for (int k = 0; k <= 90; ++k) grid.push_back(1.0 + 0.1 * k);
      grid.push_back(kInfinity);
      double best_slack = -kInfinity;
      for (double p : grid) {
        const double slack = -(1.0 - inv(p)) - lhs;
        if (slack > best_slack) {
          best_slack = slack;
          v.best_p = p;
        }
      }
      v.weak = best_slack > 0.0;
      v.strong = v.weak && intr > 3.0 * (1.0 - alpha / 2.0);
      v.binding_inequality = v.weak ? "beta0 + 1/p0' > 3(1 - alpha/2)"
                                    : "1 - alpha + [1 - (beta0 + 1/p0')]_+ < -1/p'";
      break;
    }
    case ModelKind::Vortex2D: {
      if (d != 2) throw ParameterError("the vortex model lives in dimension 2");
      const double intr = intrinsic_index(beta0, p0, 2);
      v.weak = intr > 2.0 - alpha;
      v.strong = intr > 3.0 - 1.5 * alpha;
      v.binding_inequality = v.weak ? "beta0 + 2/p0' > 3 - 3 alpha/2" : "beta0 + 2/p0' > 2 - alpha";
      break;
    }
    case ModelKind::KellerSegel: {
      if (d < 2 || d > 3) throw ParameterError("the Keller-Segel model needs dimension 2 or 3");
      const double intr = intrinsic_index(beta0, p0, d);
      v.weak = 1.0 - alpha + d < intr;
      v.strong = 2.0 - 1.5 * alpha + d < intr;
      v.binding_inequality = v.weak ? "2 - 3 alpha/2 + d < beta0 + d/p0'" : "1 - alpha + d < beta0 + d/p0'";
      break;
    }
  }
  return v;
}

}  // namespace mkv
