#include <cmath>

#include "doctest.h"

#include "blab/errors.hpp"
#include "blab/symbols.hpp"
#include "blab/weights.hpp"

using namespace blab;

TEST_SUITE_BEGIN("weights");

TEST_CASE("log weight closed-form values") {
  WeightSpec w = WeightSpec::exponential(1.0, 1.0, 0.0);
  CHECK(eval_log_weight(w, 0.0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(eval_log_weight(w, 0.5) == doctest::Approx(-2.0).epsilon(1e-14));

  WeightSpec w2 = WeightSpec::exponential(2.0, 3.0, 1.0);
  CHECK(eval_log_weight(w2, 0.9) ==
        doctest::Approx(std::log(0.1) - 3.0 / 0.01).epsilon(1e-14));
  CHECK(eval_log_weight(w2, 0.9) == doctest::Approx(-302.302585092994).epsilon(1e-12));
}

TEST_CASE("log weight test kinds and domain") {
  CHECK(eval_log_weight(WeightSpec::unweighted(), 0.73) == 0.0);
  WeightSpec st = WeightSpec::standard(2.0);
  CHECK(eval_log_weight(st, 0.5) == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-14));

  WeightSpec w = WeightSpec::exponential(1.0, 1.0, 0.0);
  CHECK_THROWS_AS(eval_log_weight(w, 1.0), DomainError);
  CHECK_THROWS_AS(eval_log_weight(w, -0.1), DomainError);
  CHECK_THROWS_AS(eval_log_weight(w, 1.5), DomainError);
}

TEST_CASE("log weight via 1-r agrees with direct form away from the boundary") {
  WeightSpec w = WeightSpec::exponential(2.0, 1.5, 1.0);
  for (double r : {0.0, 0.25, 0.5, 0.9, 0.99}) {
    CHECK(eval_log_weight_1m(w, 1.0 - r) == doctest::Approx(eval_log_weight(w, r)).epsilon(1e-12));
  }
}

TEST_CASE("tau closed-form values") {
  WeightSpec a2 = WeightSpec::exponential(2.0, 1.0, 0.0);
  CHECK(eval_tau(a2, 0.75) == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(eval_tau(a2, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  WeightSpec a1 = WeightSpec::exponential(1.0, 1.0, 0.0);
  CHECK(eval_tau(a1, 0.99) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(eval_tau(WeightSpec::unweighted(), 0.3) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK_THROWS_AS(eval_tau(a1, 1.0), DomainError);
}

TEST_CASE("factory preconditions") {
  CHECK_THROWS_AS(WeightSpec::exponential(0.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(WeightSpec::exponential(1.0, -1.0, 0.0), DomainError);
  CHECK_THROWS_AS(WeightSpec::exponential(1.0, 1.0, -0.5), DomainError);
  CHECK_THROWS_AS(WeightSpec::standard(-1.0), DomainError);
}

TEST_CASE("tau constants for typical weights") {
  WeightSpec a1 = WeightSpec::exponential(1.0, 1.0, 0.0);
  TauConstants tc1 = measure_tau_constants(a1);
  CHECK(tc1.c1 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tc1.c2 == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(tc1.m_tau == std::min(1.0, std::min(1.0 / tc1.c1, 1.0 / tc1.c2)) / 4.0);

  WeightSpec a2 = WeightSpec::exponential(2.0, 1.0, 0.0);
  TauConstants tc2 = measure_tau_constants(a2);
  CHECK(tc2.c1 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tc2.c2 == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(tc2.m_tau == doctest::Approx(0.125).epsilon(1e-4));
  CHECK(tc2.m_tau > 0.0);
  CHECK(tc2.m_tau <= 0.25);
}

TEST_CASE("class membership report for an exponential weight") {
  WeightSpec w = WeightSpec::exponential(1.0, 1.0, 0.0);
  ClassWReport rep = check_class_W(w, default_radial_grid());
  CHECK(rep.log_weight_strictly_decreasing);
  CHECK(rep.tau_decreasing);
  CHECK(rep.tau_prime_vanishes);
  CHECK(rep.tau_growth_side_condition);
  CHECK(rep.in_class());
  CHECK(rep.regular);
  REQUIRE(rep.regularity.size() == 3);
  for (const RegularityTrace& tr : rep.regularity) {
    CHECK(tr.decreasing);
    CHECK(tr.below_threshold);
  }
}

TEST_CASE("regularity fails for the test kinds") {
  ClassWReport st = check_class_W(WeightSpec::standard(2.0), default_radial_grid());
  CHECK_FALSE(st.regular);
  ClassWReport un = check_class_W(WeightSpec::unweighted(), default_radial_grid());
  CHECK_FALSE(un.regular);
}

TEST_CASE("regularity trace value is the closed-form log ratio") {
  // log w(1-delta t) - log w(1-t) = -c (delta^-a - 1)/t^a
  WeightSpec w = WeightSpec::exponential(2.0, 1.0, 0.0);
  ClassWReport rep = check_class_W(w, default_radial_grid());
  const RegularityTrace* half = nullptr;
  for (const RegularityTrace& tr : rep.regularity) {
    if (tr.delta == 0.5) half = &tr;
  }
  REQUIRE(half != nullptr);
  REQUIRE(half->j_begin == 4);
  REQUIRE(half->log_ratios.size() >= 3);
  CHECK(half->log_ratios[6 - half->j_begin] == doctest::Approx(-12288.0).epsilon(1e-13));
}

TEST_CASE("class check needs a dense grid") {
  std::vector<double> tiny{0.1, 0.5, 0.9};
  CHECK_THROWS_AS(check_class_W(WeightSpec::exponential(1.0, 1.0, 0.0), tiny), DomainError);
}

TEST_CASE("log weight monotone on a grid") {
  WeightSpec w = WeightSpec::exponential(2.0, 1.0, 0.0);
  double prev = eval_log_weight(w, 0.0);
  for (int i = 1; i <= 400; ++i) {
    double r = 0.999 * double(i) / 400.0;
    double cur = eval_log_weight(w, r);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("tau monotonicity and side condition") {
  for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
    WeightSpec w = WeightSpec::exponential(alpha, 1.0, 0.0);
    double prev_tau = eval_tau(w, 0.0);
    for (int i = 1; i <= 200; ++i) {
      double r = 0.9999 * double(i) / 200.0;
      double cur = eval_tau(w, r);
      CHECK(cur < prev_tau);
      CHECK(cur <= (1.0 - r) * (1.0 + 1e-12));
      prev_tau = cur;
    }
  }
}

TEST_CASE("ratio diagnostics: identity map") {
  WeightSpec w = WeightSpec::exponential(1.0, 1.0, 0.0);
  MapSpec id = MapSpec::identity();
  RatioDiagnostics d = weight_ratio_diag(w, id, Point(0.3, 0.2));
  CHECK(d.log_weight_ratio == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(d.tau_ratio == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.log_norm_factor == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(d.log_compact_factor == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("ratio diagnostics: dilation and squaring values") {
  WeightSpec w = WeightSpec::exponential(1.0, 1.0, 0.0);
  MapSpec half = MapSpec::dilation(0.5);
  RatioDiagnostics d = weight_ratio_diag(w, half, Point(0.9, 0.0));
  CHECK(d.log_weight_ratio == doctest::Approx(-10.0 + 1.0 / 0.55).epsilon(1e-13));

  MapSpec sq = MapSpec::polynomial({Point(0.0), Point(0.0), Point(1.0)});
  RatioDiagnostics d2 = weight_ratio_diag(w, sq, Point(0.99, 0.0));
  CHECK(d2.log_weight_ratio == doctest::Approx(-100.0 + 1.0 / (1.0 - 0.99 * 0.99)).epsilon(1e-13));
  // squaring pushes points inward, so the compactness factor decays
  CHECK(d2.log_compact_factor < -40.0);
}

TEST_CASE("ratio diagnostics reject image outside the disk") {
  WeightSpec w = WeightSpec::exponential(1.0, 1.0, 0.0);
  MapSpec bad;  // bypasses the factory certificate on purpose
  bad.kind = MapSpec::Kind::Polynomial;
  bad.coeffs = {Point(2.0)};
  CHECK_THROWS_AS(weight_ratio_diag(w, bad, Point(0.0)), NotSelfMapError);
  MapSpec id = MapSpec::identity();
  CHECK_THROWS_AS(weight_ratio_diag(w, id, Point(1.0, 0.0)), DomainError);
}

TEST_CASE("boundary rings are nested toward 1") {
  std::vector<double> rings = boundary_rings();
  REQUIRE(rings.size() == 3);
  CHECK(rings.front() == doctest::Approx(1.0 - 1e-2).epsilon(1e-12));
  CHECK(rings.back() == doctest::Approx(1.0 - 1e-4).epsilon(1e-12));
  CHECK(rings[0] < rings[1]);
  CHECK(rings[1] < rings[2]);
}

TEST_SUITE_END();
