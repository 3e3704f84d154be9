#include <cmath>
#include <random>

#include "doctest.h"
#include "mkv/criteria.hpp"
#include "mkv/grid.hpp"

using namespace mkv;

namespace {

constexpr double kInfty = std::numeric_limits<double>::infinity();

LebesgueBesovIndices burgers(double p0, double beta0) {
  LebesgueBesovIndices idx;
  idx.d = 1;
  idx.beta = 0.0;
  idx.p = 1.0;
  idx.alpha = 2.0;
  idx.p0 = p0;
  idx.beta0 = beta0;
  return idx;
}

LebesgueBesovIndices keller_segel(double p0, double beta0) {
  LebesgueBesovIndices idx;
  idx.d = 2;
  idx.beta = -1.0;
  idx.p = 2.0;
  idx.alpha = 2.0;
  idx.has_div_bound = true;
  idx.p0 = p0;
  idx.beta0 = beta0;
  return idx;
}

}  // namespace

TEST_CASE("intrinsic index") {
  CHECK(intrinsic_index(0.0, kInfty, 2) == 2.0);
  CHECK(intrinsic_index(1.0, 2.0, 2) == 2.0);
  CHECK(intrinsic_index(0.0, 1.0, 3) == 0.0);
}

TEST_CASE("burgers setting exponents") {
  auto idx = burgers(2.0, 0.0);
  idx.eta = 0.1;
  const ConditionReport r = evaluate_conditions(idx);
  CHECK(r.c1);
  CHECK(r.weak());
  CHECK(r.zeta0 == doctest::Approx(0.25));
  CHECK(r.Gamma == doctest::Approx(0.4));
  CHECK(r.theta == doctest::Approx(0.45));
  CHECK(r.r0_window.lower == doctest::Approx(2.0));
  CHECK(r.r0_window.upper == doctest::Approx(1.0 / 0.45));
  CHECK(r.margin == doctest::Approx(0.5));
  CHECK_FALSE(r.eta_clamped);
}

TEST_CASE("keller-segel setting") {
  const ConditionReport pass = evaluate_conditions(keller_segel(4.0, 0.0));
  CHECK(pass.c2);
  CHECK(pass.intrinsic_index == doctest::Approx(1.5));
  const ConditionReport fail = evaluate_conditions(keller_segel(1.0, 0.0));
  CHECK_FALSE(fail.c2);
  auto no_div = keller_segel(4.0, 0.0);
  no_div.has_div_bound = false;
  const ConditionReport missing = evaluate_conditions(no_div);
  CHECK_FALSE(missing.c2);
  CHECK(missing.c2_reason == "missing div(b) structure condition");
}

TEST_CASE("invalid indices are rejected") {
  auto idx = burgers(2.0, 0.0);
  idx.alpha = 0.8;
  CHECK_THROWS_WITH_AS(evaluate_conditions(idx), "alpha must lie in (1, 2]", ParameterError);
  idx = burgers(2.0, 0.0);
  idx.beta = -1.5;
  CHECK_THROWS_AS(evaluate_conditions(idx), ParameterError);
  idx = burgers(0.5, 0.0);
  CHECK_THROWS_AS(evaluate_conditions(idx), ParameterError);
  idx = burgers(2.0, -0.1);
  CHECK_THROWS_AS(evaluate_conditions(idx), ParameterError);
}

TEST_CASE("eta at or above its supremum is clamped") {
  auto idx = burgers(2.0, 0.0);
  idx.eta = 5.0;
  const ConditionReport r = evaluate_conditions(idx);
  CHECK(r.eta_clamped);
  CHECK(r.eta == doctest::Approx(0.5 * r.eta_max));
  CHECK(r.Gamma > 0.0);
  CHECK(r.theta > 0.0);
}

TEST_CASE("model thresholds") {
  const ModelVerdict b = model_thresholds(ModelKind::Burgers, 2.0, 1, 0.0, 2.0);
  CHECK(b.weak);
  CHECK(b.strong);
  const ModelVerdict v = model_thresholds(ModelKind::Vortex2D, 2.0, 2, 0.0, 1.0);
  CHECK_FALSE(v.weak);
  const ModelVerdict k = model_thresholds(ModelKind::KellerSegel, 2.0, 2, 1.5, 1.0);
  CHECK(k.weak);
  CHECK(k.strong);
  CHECK_FALSE(k.binding_inequality.empty());
  CHECK_THROWS_AS(model_thresholds(ModelKind::Burgers, 2.0, 2, 0.0, 2.0), ParameterError);
  CHECK_THROWS_AS(model_thresholds(ModelKind::Vortex2D, 2.0, 1, 0.0, 2.0), ParameterError);
  CHECK_THROWS_AS(model_thresholds(ModelKind::KellerSegel, 2.0, 1, 0.0, 2.0), ParameterError);
}

TEST_CASE("burgers weak uniqueness matches the two documented regimes at alpha = 2") {
  CHECK(model_thresholds(ModelKind::Burgers, 2.0, 1, 0.0, 1.5).weak);
  CHECK(model_thresholds(ModelKind::Burgers, 2.0, 1, 0.2, 1.0).weak);
  CHECK_FALSE(model_thresholds(ModelKind::Burgers, 2.0, 1, 0.0, 1.0).weak);
}

TEST_CASE("randomized invariants") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto exponent = [&] { return u(rng) < 0.2 ? kInfty : 1.0 + 9.0 * u(rng); };
  int weak_cases = 0;
  for (int it = 0; it < 10000; ++it) {
    LebesgueBesovIndices idx;
    idx.d = 1 + static_cast<int>(u(rng) * 3);
    idx.alpha = 1.0 + 1e-3 + (1.0 - 1e-3) * u(rng);
    idx.beta = u(rng) < 0.3 ? -1.0 : -u(rng);
    idx.p = exponent();
    idx.q = exponent();
    idx.r = exponent();
    idx.p0 = exponent();
    idx.q0 = exponent();
    idx.beta0 = 2.0 * u(rng);
    idx.has_div_bound = u(rng) < 0.7;
    idx.eta = 1e-3;
    const ConditionReport r = evaluate_conditions(idx);
    if (r.c1_s) CHECK(r.c1);
    if (r.c2_s) CHECK(r.c2);
    if (r.c0_s) CHECK(r.c0);

    auto more = idx;
    more.beta0 += 0.3;
    const ConditionReport m = evaluate_conditions(more);
    if (r.c1) CHECK(m.c1);
    if (r.c2) CHECK(m.c2);
    if (r.c1_s) CHECK(m.c1_s);
    if (r.c2_s) CHECK(m.c2_s);

    if (!r.weak()) continue;
    ++weak_cases;
    CHECK(r.theta - (r.Gamma / idx.alpha + r.zeta0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.Gamma > 0.0);
    CHECK_FALSE(r.r0_window.empty());
  }
  CHECK(weak_cases > 1000);
}

TEST_CASE("diffusive case: strong and weak beta in (-1, 0] conditions coincide on the bracket branch") {
  for (double beta : {-0.8, -0.4, 0.0})
    for (double intr_shift : {0.1, 0.5, 1.0}) {
      LebesgueBesovIndices idx = burgers(1.0, 0.0);
      idx.beta = beta;
      idx.p = 2.0;
      idx.beta0 = std::max(0.0, -beta + 0.5 - intr_shift);
      const ConditionReport r = evaluate_conditions(idx);
      CHECK(r.c1 == r.c1_s);
    }
}

TEST_CASE("report formatting is key: value lines") {
  const std::string s = format_report(evaluate_conditions(keller_segel(4.0, 0.0)));
  CHECK(s.find("c2: true\n") != std::string::npos);
  CHECK(s.find("theta: ") != std::string::npos);
  CHECK(s.find("r0_window: (") != std::string::npos);
}
