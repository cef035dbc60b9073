#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "blab/errors.hpp"
#include "blab/geometry.hpp"
#include "blab/symbols.hpp"
#include "blab/weights.hpp"
#include "doctest.h"

using namespace blab;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("max_delta matches the measured tau constants") {
  CHECK(max_delta(WeightSpec::unweighted()) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(max_delta(WeightSpec::exponential(2.0, 1.0, 0.0)) == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(max_delta(WeightSpec::exponential(1.0, 1.0, 0.0)) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-4));
}

TEST_CASE("adapted disk geometry") {
  WeightSpec w = WeightSpec::unweighted();
  AdaptedDisk d = adapted_disk(w, {0.5, 0.0}, 0.2);
  CHECK(d.radius == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(d.normalized_area() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(d.contains({0.55, 0.0}));
  CHECK(d.contains({0.5, 0.09}));
  CHECK_FALSE(d.contains({0.61, 0.0}));
  CHECK_FALSE(d.contains({0.5, 0.1}));  // boundary is excluded

  CHECK_THROWS_AS(adapted_disk(w, {0.5, 0.0}, 0.3), DomainError);
  CHECK_THROWS_AS(adapted_disk(w, {0.5, 0.0}, 0.0), DomainError);
  CHECK_THROWS_AS(adapted_disk(w, {1.0, 0.0}, 0.2), DomainError);
}

TEST_CASE("comparability ratios near the origin stay close to one") {
  ComparabilityBounds b = comparability_check(WeightSpec::unweighted(), {0.0, 0.0}, 0.2, 1000);
  CHECK(b.within_half_two);
  CHECK(b.max_ratio <= 1.0 + 1e-12);
  CHECK(b.min_ratio >= 0.79);
}

TEST_CASE("comparability sweep hits the exact boundary ratios") {
  WeightSpec w = WeightSpec::unweighted();
  ComparabilityBounds b = comparability_check(w, {0.9, 0.0}, 0.2, 1000);
  CHECK(b.within_half_two);
  CHECK(b.min_ratio == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(b.max_ratio == doctest::Approx(1.2).epsilon(1e-9));

  WeightSpec e2 = WeightSpec::exponential(2.0, 1.0, 0.0);
  ComparabilityBounds b2 = comparability_check(e2, {0.9, 0.0}, 0.0625, 1000);
  CHECK(b2.within_half_two);
  CHECK(b2.min_ratio == doctest::Approx(0.987539).epsilon(1e-4));
  CHECK(b2.max_ratio == doctest::Approx(1.012539).epsilon(1e-4));

  CHECK_THROWS_AS(comparability_check(w, {0.9, 0.0}, 0.25, 1000), DomainError);
  CHECK_THROWS_AS(comparability_check(w, {0.9, 0.0}, 0.3, 1000), DomainError);
}

TEST_CASE("covering invariants certify on the unweighted reference run") {
  CoveringSequence seq = build_covering(WeightSpec::unweighted(), 0.2, 0.1, 400);
  CHECK(seq.separation_violations == 0);
  CHECK(seq.uncovered_points == 0);
  CHECK(seq.points.size() > 500);
  CHECK(seq.points.size() < 2000);
  for (Point a : seq.points) CHECK(std::abs(a) <= 0.9 + 1e-12);
  // measured overlap count for this exact configuration; the greedy sweep
  // packs slightly denser than the ideal square delta-lattice (25)
  CHECK(seq.multiplicity >= 20);
  CHECK(seq.multiplicity <= 35);
}

TEST_CASE("covering point count scales like 1/delta^2") {
  WeightSpec w = WeightSpec::unweighted();
  CoveringSequence fine = build_covering(w, 0.01, 0.5, 400);
  CoveringSequence coarse = build_covering(w, 0.02, 0.5, 400);
  CHECK(fine.separation_violations == 0);
  CHECK(coarse.separation_violations == 0);
  CHECK(fine.uncovered_points == 0);
  CHECK(coarse.uncovered_points == 0);
  double ratio = double(fine.points.size()) / double(coarse.points.size());
  CHECK(ratio > 2.8);
  CHECK(ratio < 5.2);
}

TEST_CASE("covering rejects bad parameters and impossible grids") {
  WeightSpec w = WeightSpec::unweighted();
  CHECK_THROWS_AS(build_covering(w, 0.25, 0.1), DomainError);
  CHECK_THROWS_AS(build_covering(w, 0.2, 0.0), DomainError);
  CHECK_THROWS_AS(build_covering(w, 0.2, 1.0), DomainError);
  CHECK_THROWS_AS(build_covering(w, 0.01, 0.01), ResolutionError);
  CHECK_THROWS_AS(build_covering(w, 0.2, 0.1, 8), DomainError);
  // explicit grid overrides the pitch rule
  CoveringSequence seq = build_covering(w, 0.01, 0.01, 64);
  CHECK(seq.separation_violations == 0);
  CHECK(seq.uncovered_points == 0);
}

TEST_CASE("bergman distance vanishes on equal points") {
  BergmanDistance d = bergman_distance(WeightSpec::unweighted(), {0.3, 0.2}, {0.3, 0.2});
  CHECK(d.graph == 0.0);
  CHECK(d.segment == 0.0);
}

TEST_CASE("bergman radial oracles bracket the graph value from above") {
  struct Row {
    WeightSpec w;
    double exact;
    double slack;
  };
  std::vector<Row> rows = {
      {WeightSpec::exponential(2.0, 1.0, 0.0), 1.0, 1.05},
      {WeightSpec::exponential(1.0, 1.0, 0.0), 2.0 * (std::sqrt(2.0) - 1.0), 1.05},
      {WeightSpec::unweighted(), std::log(2.0), 1.05},
  };
  for (const Row& row : rows) {
    BergmanDistance d = bergman_distance(row.w, {0.0, 0.0}, {0.5, 0.0});
    CHECK(d.graph >= row.exact - 1e-12);
    CHECK(d.graph <= row.exact * row.slack);
    CHECK(d.segment >= row.exact - 1e-12);
    CHECK(d.segment <= row.exact * 1.01);
  }
}

TEST_CASE("bergman refinement is monotone and symmetry is exact") {
  WeightSpec w = WeightSpec::exponential(2.0, 1.0, 0.0);
  Point z{0.1, -0.2}, xi{0.45, 0.3};
  double d0 = bergman_distance(w, z, xi, 0).graph;
  double d1 = bergman_distance(w, z, xi, 1).graph;
  double d2 = bergman_distance(w, z, xi, 2).graph;
  CHECK(d1 <= d0);
  CHECK(d2 <= d1);
  CHECK(d2 > 0.0);
  CHECK(bergman_distance(w, z, xi).graph == bergman_distance(w, xi, z).graph);
}

TEST_CASE("bergman batch distances agree with single queries") {
  WeightSpec w = WeightSpec::unweighted();
  Point z{0.0, 0.0};
  std::vector<Point> targets = {{0.5, 0.0}, {0.0, 0.4}, {-0.3, -0.3}};
  std::vector<BergmanDistance> batch = bergman_distances(w, z, targets);
  for (size_t i = 0; i < targets.size(); ++i) {
    BergmanDistance single = bergman_distance(w, z, targets[i]);
    // the batch graph carries every endpoint, so it can only be shorter
    CHECK(batch[i].graph <= single.graph + 1e-12);
    CHECK(batch[i].graph >= 0.5 * single.graph);
    CHECK(batch[i].segment == doctest::Approx(single.segment).epsilon(1e-12));
  }
}

TEST_CASE("bergman rejects boundary points and bad levels") {
  WeightSpec w = WeightSpec::unweighted();
  CHECK_THROWS_AS(bergman_distance(w, {0.0, 0.0}, {1.0 - 1e-7, 0.0}), DomainError);
  CHECK_THROWS_AS(bergman_distance(w, {1.0 - 1e-7, 0.0}, {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(bergman_distance(w, {0.0, 0.0}, {0.5, 0.0}, 3), DomainError);
  CHECK_THROWS_AS(bergman_distance(w, {0.0, 0.0}, {0.5, 0.0}, -1), DomainError);
}

TEST_CASE("horodisk predicates agree and are tangent at zeta") {
  std::mt19937 rng(20240818);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double k : {0.5, 1.0, 2.0}) {
    Horodisk h{{1.0, 0.0}, k};
    CHECK(h.contains_quadratic(h.zeta));
    CHECK(std::abs(h.center()) + h.radius() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 10000; ++i) {
      Point z{u(rng), u(rng)};
      if (std::abs(z) >= 1.0) continue;
      CHECK(h.contains_quadratic(z) == h.contains_euclidean(z));
    }
  }
}

TEST_CASE("julia containment is an identity for the identity map") {
  JuliaReport rep =
      julia_containment(MapSpec::identity(), {1.0, 0.0}, 1.0, {0.5, 1.0, 2.0}, 1000);
  CHECK(rep.holds);
  CHECK(rep.max_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.samples_used > 500);
  CHECK(rep.eta.real() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("julia containment holds for the squaring map with d = 2") {
  MapSpec sq_map = MapSpec::polynomial({0.0, 0.0, 1.0});
  JuliaReport rep = julia_containment(sq_map, {1.0, 0.0}, 2.0, {0.5, 1.0, 2.0}, 1000);
  CHECK(rep.holds);
  CHECK(rep.max_ratio <= 1.0 + 1e-6);
  // an understated derivative must break the bound
  JuliaReport bad = julia_containment(sq_map, {1.0, 0.0}, 1.9, {0.5, 1.0, 2.0}, 1000);
  CHECK_FALSE(bad.holds);
}

TEST_CASE("julia containment holds for the hyperbolic automorphism") {
  MapSpec m = MapSpec::hyperbolic(1.0 / 3.0);
  JuliaReport rep = julia_containment(m, {1.0, 0.0}, 0.5, {0.5, 1.0, 2.0}, 1000);
  CHECK(rep.holds);
  CHECK(rep.max_ratio > 0.99);  // equality is attained along (0,1)
}

TEST_CASE("julia containment rejects maps without a Julia point") {
  CHECK_THROWS_AS(julia_containment(MapSpec::dilation(0.5), {1.0, 0.0}, 1.0, {1.0}, 100),
                  DomainError);
  CHECK_THROWS_AS(julia_containment(MapSpec::identity(), {0.5, 0.0}, 1.0, {1.0}, 100),
                  DomainError);
  CHECK_THROWS_AS(julia_containment(MapSpec::identity(), {1.0, 0.0}, 0.0, {1.0}, 100),
                  DomainError);
}

TEST_CASE("nontangential region membership") {
  Point zeta{1.0, 0.0};
  for (double r : {0.1, 0.5, 0.9, 0.99}) {
    CHECK(nontangential_region(zeta, 1.5, {r, 0.0}));
    CHECK(nontangential_region(zeta, 2.0, {r, 0.0}));
  }
  CHECK_FALSE(nontangential_region(zeta, 2.0, {0.0, 0.99}));
  CHECK_THROWS_AS(nontangential_region(zeta, 1.0, {0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(nontangential_region({0.5, 0.0}, 2.0, {0.0, 0.0}), DomainError);
}

TEST_SUITE_END();
