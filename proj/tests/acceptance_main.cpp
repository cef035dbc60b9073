#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "blab/errors.hpp"
#include "blab/geometry.hpp"
#include "blab/kernel.hpp"
#include "blab/numerics.hpp"
#include "blab/operators.hpp"
#include "blab/symbols.hpp"
#include "blab/weights.hpp"

using namespace blab;

namespace {

const WeightSpec kFlat = WeightSpec::unweighted();
const WeightSpec kLab = WeightSpec::exponential(1.0, 1.0, 0.0);
const WeightSpec kSteep = WeightSpec::exponential(2.0, 1.0, 0.0);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

Point sample_disk(std::mt19937& rng, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::sqrt(unit(rng));
  const double theta = 2.0 * kPi * unit(rng);
  return std::polar(r, theta);
}

int run(int num, const char* name, double budget_s, const std::function<Outcome()>& body) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  Outcome oc;
  try {
    oc = body();
  } catch (const std::exception& e) {
    oc.pass = false;
    oc.detail = strf("exception: %s", e.what());
  }
  const double dt = std::chrono::duration<double>(clock::now() - t0).count();
  bool pass = oc.pass;
  std::string detail = oc.detail;
  if (pass && budget_s > 0.0 && dt >= budget_s) {
    pass = false;
    detail += strf(" [over the %.0fs budget]", budget_s);
  }
  std::printf("[%s] criterion %2d %-22s %s (%.1fs)\n", pass ? "PASS" : "FAIL", num, name,
              detail.c_str(), dt);
  std::fflush(stdout);
  return pass ? 0 : 1;
}

Outcome kernel_closed_form() {
  const KernelTable& t = shared_kernel_table(kFlat);
  std::mt19937 rng(1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Point z = sample_disk(rng, 0.9);
    const Point xi = sample_disk(rng, 0.9);
    const Point got = kernel_eval(t, z, xi);
    const Point d = 1.0 - z * std::conj(xi);
    const Point want = 1.0 / (d * d);
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  return {worst < 1e-8, strf("max rel err %.2e over 1000 pairs", worst)};
}

Outcome reproducing_property() {
  const DiskQuadrature q = build_quadrature(1024, 128, 2);
  const std::vector<QuadratureNode> nodes = q.materialize();
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> small(-0.2, 0.2);
  double worst = 0.0;
  for (const WeightSpec* w : {&kLab, &kSteep}) {
    const KernelTable& t = shared_kernel_table(*w);
    std::vector<double> node_weight(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      node_weight[i] = nodes[i].mass * std::exp(eval_log_weight(*w, std::abs(nodes[i].point)));
    for (int rep = 0; rep < 25; ++rep) {
      const Point z = sample_disk(rng, 0.7);
      std::vector<Point> coeffs(11);
      coeffs[0] = Point(1.0, 0.0);
      for (int k = 1; k <= 10; ++k) coeffs[k] = Point(small(rng), small(rng));
      auto f = [&](Point x) {
        Point acc = coeffs[10];
        for (int k = 9; k >= 0; --k) acc = acc * x + coeffs[k];
        return acc;
      };
      Point ip(0.0, 0.0);
      for (std::size_t i = 0; i < nodes.size(); ++i)
        ip += node_weight[i] * f(nodes[i].point) * std::conj(kernel_eval(t, nodes[i].point, z));
      const Point want = f(z);
      worst = std::max(worst, std::abs(ip - want) / std::abs(want));
    }
  }
  return {worst < 1e-8, strf("max rel err %.2e over 50 points", worst)};
}

Outcome berezin_area_identity() {
  const KernelTable& t = shared_kernel_table(kLab);
  const DiskQuadrature q640 = build_quadrature(640, 16, 2);
  const DiskQuadrature q1280 = build_quadrature(1280, 16, 2);
  double worst_inner = 0.0;
  for (double r : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9})
    worst_inner = std::max(worst_inner,
                           std::abs(berezin_area(t, q640, std::polar(r, 1.3)) - 1.0));
  double worst_outer = 0.0;
  for (double r : {0.95, 0.99})
    worst_outer = std::max(worst_outer,
                           std::abs(berezin_area(t, q1280, std::polar(r, 0.4)) - 1.0));
  const bool pass = worst_inner < 1e-4 && worst_outer < 1e-3;
  return {pass, strf("|B-1| %.2e inside, %.2e near the boundary", worst_inner, worst_outer)};
}

Outcome dilation_model() {
  const KernelTable& t = shared_kernel_table(kLab);
  const MultiplierSpec one = MultiplierSpec::one();
  double worst_p2 = 0.0;
  double worst_p1 = 0.0;
  for (double r : {0.3, 0.5, 0.8}) {
    const MapSpec phi = MapSpec::dilation(r);
    const double s2 = schatten_norm(t, one, phi, 2.0).value_2n;
    const double s1 = schatten_norm(t, one, phi, 1.0).value_2n;
    worst_p2 = std::max(worst_p2, std::abs(s2 - 1.0 / std::sqrt(1.0 - r * r)) * std::sqrt(1.0 - r * r));
    worst_p1 = std::max(worst_p1, std::abs(s1 - 1.0 / (1.0 - r)) * (1.0 - r));
  }

  const MapSpec half = MapSpec::dilation(0.5);
  const DenseMatrix g = galerkin_matrix(t, MultiplierSpec::one(), half, 64);
  double off = 0.0;
  for (std::size_t j = 0; j < g.rows; ++j)
    for (std::size_t k = 0; k < g.cols; ++k)
      if (j != k) off = std::max(off, std::abs(g.at(j, k)));

  double worst_tail = 0.0;
  for (int n : {0, 1, 5, 10, 20}) {
    const double tail = tail_projection_norm(t, one, half, n, 200);
    worst_tail = std::max(worst_tail, std::abs(tail - std::pow(0.5, n)));
  }

  const bool pass = worst_p2 < 1e-3 && worst_p1 < 1e-3 && off < 1e-10 && worst_tail < 1e-6;
  return {pass, strf("S_2 rel %.1e, S_1 rel %.1e, offdiag %.1e, tail err %.1e", worst_p2,
                     worst_p1, off, worst_tail)};
}

Outcome classification_table() {
  const KernelTable& t = shared_kernel_table(kLab);
  const MultiplierSpec one = MultiplierSpec::one();
  const DiskQuadrature q = build_quadrature(160, 64, 2);
  std::vector<std::string> wrong;

  const ClassificationReport id =
      classify_operator(t, one, MapSpec::identity(), q, {1.0, 2.0}, {});
  if (id.bounded.verdict != BoundVerdict::Bounded) wrong.push_back("identity bounded");
  if (id.compact.verdict != CompactVerdict::NotCompact) wrong.push_back("identity compact");
  for (const auto& [p, entry] : id.schatten)
    if (entry.norm.verdict != SpVerdict::Infinite)
      wrong.push_back(strf("identity S_%g", p));

  const ClassificationReport dil =
      classify_operator(t, one, MapSpec::dilation(0.5), q, {1.0, 2.0}, {});
  if (dil.bounded.verdict != BoundVerdict::Bounded) wrong.push_back("dilation bounded");
  if (dil.compact.verdict != CompactVerdict::Compact) wrong.push_back("dilation compact");
  for (const auto& [p, entry] : dil.schatten)
    if (entry.norm.verdict != SpVerdict::Finite) wrong.push_back(strf("dilation S_%g", p));

  const ClassificationReport sqr =
      classify_operator(t, one, MapSpec::polynomial({Point(0, 0), Point(0, 0), Point(1, 0)}), q,
                        {2.0}, {});
  if (sqr.bounded.verdict != BoundVerdict::Bounded) wrong.push_back("square bounded");
  if (sqr.compact.verdict != CompactVerdict::Compact) wrong.push_back("square compact");

  const MapSpec hyp = MapSpec::hyperbolic(1.0 / 3.0);
  const ClassificationReport hy = classify_operator(t, one, hyp, q, {2.0}, {});
  if (hy.bounded.verdict != BoundVerdict::Unbounded) wrong.push_back("hyperbolic bounded");
  if (hy.angular.verdict != AngularVerdict::SomeDerivativeBelowOne)
    wrong.push_back("hyperbolic angular");
  const double d = angular_derivative(hyp, Point(1.0, 0.0)).d_phi;
  if (!(std::abs(d - 0.5) < 0.02)) wrong.push_back("hyperbolic d_phi");

  std::string detail = "identity, dilation, square, hyperbolic all as expected";
  if (!wrong.empty()) {
    detail = "wrong:";
    for (const std::string& s : wrong) detail += " " + s + ";";
  }
  return {wrong.empty(), detail};
}

Outcome schatten_cross_check() {
  const KernelTable& t = shared_kernel_table(kLab);
  const MultiplierSpec one = MultiplierSpec::one();
  const DiskQuadrature q = build_quadrature(160, 64, 2);
  const std::vector<std::pair<std::string, MapSpec>> maps = {
      {"identity", MapSpec::identity()},
      {"dilation", MapSpec::dilation(0.5)},
      {"square", MapSpec::polynomial({Point(0, 0), Point(0, 0), Point(1, 0)})},
      {"hyperbolic", MapSpec::hyperbolic(1.0 / 3.0)}};
  std::string detail;
  bool pass = true;
  for (const auto& [name, phi] : maps) {
    const SpVerdict a = schatten_norm(t, one, phi, 2.0).verdict;
    const SpVerdict b = schatten_criterion(t, one, phi, 2.0, q).verdict;
    const SpVerdict c = hilbert_schmidt_test(kLab, one, phi).verdict;
    const bool ok = a == b && b == c && a != SpVerdict::Indeterminate;
    pass = pass && ok;
    detail += strf("%s%s=%s", detail.empty() ? "" : ", ", name.c_str(), to_string(a));
    if (!ok) detail += strf("/%s/%s MISMATCH", to_string(b), to_string(c));
  }
  return {pass, detail};
}

Outcome covering_multiplicity() {
  const double delta = 0.5 * max_delta(kSteep);
  const CoveringSequence cov = build_covering(kSteep, delta, 1e-2, 400);
  const bool pass =
      cov.separation_violations == 0 && cov.uncovered_points == 0 && cov.multiplicity <= 25;
  return {pass, strf("%zu points, multiplicity %d (bound 25), separation %lld, uncovered %lld",
                     cov.points.size(), cov.multiplicity, cov.separation_violations,
                     cov.uncovered_points)};
}

Outcome diagonal_comparison() {
  std::string detail;
  bool pass = true;
  for (const WeightSpec* w : {&kLab, &kSteep}) {
    const KernelTable& t = shared_kernel_table(*w);
    const std::vector<double> ring = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    const DiagonalEstimate de = check_diagonal_estimate(t, ring, 0.48 * max_delta(*w));
    const double spread = de.diag_max / de.diag_min;
    const bool ok = spread < 100.0 && de.ratio_min >= 1e-2 && de.ratio_max <= 1.0 + 1e-12;
    pass = pass && ok;
    detail += strf("%sspread %.1f ratio [%.3f, %.3f]", detail.empty() ? "" : "; ", spread,
                   de.ratio_min, de.ratio_max);
  }
  return {pass, detail};
}

Outcome offdiagonal_decay() {
  const KernelTable& t = shared_kernel_table(kSteep);
  std::mt19937 rng(9001);
  std::vector<std::pair<Point, Point>> pairs;
  for (int s = 0; s < 10; ++s) {
    const Point src = sample_disk(rng, 0.78);
    for (int k = 0; k < 10; ++k) pairs.push_back({src, sample_disk(rng, 0.78)});
  }
  const OffDiagonalDecay od = check_offdiagonal_decay(t, pairs);
  const bool pass = od.sigma > 0.0 && od.r_squared > 0.5 && od.pairs_used == 100;
  return {pass, strf("sigma %.3f, R^2 %.3f, %d pairs", od.sigma, od.r_squared, od.pairs_used)};
}

Outcome angular_derivatives() {
  bool pass = true;
  std::string detail;
  const MapSpec sqr = MapSpec::polynomial({Point(0, 0), Point(0, 0), Point(1, 0)});
  double worst_id = 0.0;
  double worst_sq = 0.0;
  for (int j = 0; j < 8; ++j) {
    const Point zeta = std::polar(1.0, 2.0 * kPi * j / 8.0);
    const BoundaryDiagnostics bid = angular_derivative(MapSpec::identity(), zeta);
    const BoundaryDiagnostics bsq = angular_derivative(sqr, zeta);
    pass = pass && bid.finite && bsq.finite;
    worst_id = std::max(worst_id, std::abs(bid.d_phi - 1.0));
    worst_sq = std::max(worst_sq, std::abs(bsq.d_phi - 2.0));
  }
  pass = pass && worst_id < 1e-3 && worst_sq < 0.02;

  const MapSpec hyp = MapSpec::hyperbolic(1.0 / 3.0);
  const double d_plus = angular_derivative(hyp, Point(1.0, 0.0)).d_phi;
  const double d_minus = angular_derivative(hyp, Point(-1.0, 0.0)).d_phi;
  const double product = d_plus * d_minus;
  pass = pass && std::abs(product - 1.0) < 0.02;

  detail = strf("identity err %.1e, square err %.1e, automorphism product %.4f", worst_id,
                worst_sq, product);
  return {pass, detail};
}

Outcome bergman_distance_check() {
  const double d0 = bergman_distance(kSteep, Point(0, 0), Point(0.5, 0), 0).graph;
  const double d1 = bergman_distance(kSteep, Point(0, 0), Point(0.5, 0), 1).graph;
  const double d2 = bergman_distance(kSteep, Point(0, 0), Point(0.5, 0), 2).graph;
  const bool monotone = d0 >= d1 && d1 >= d2;
  const bool bracket = d2 >= 1.0 && d2 <= 1.05;
  return {monotone && bracket,
          strf("levels %.4f >= %.4f >= %.4f, target [1.0, 1.05]", d0, d1, d2)};
}

Outcome kernel_vanishing() {
  const KernelTable& t = shared_kernel_table(kLab);
  std::vector<Point> zs;
  for (int n = 4; n <= 8; ++n) zs.push_back(Point(1.0 - std::pow(2.0, -n), 0.0));
  const VanishingReport vr = kernel_vanishing_on_compacts(t, 0.5, zs);
  const bool pass = vr.decreasing && vr.final_over_initial < 1e-2;
  return {pass, strf("decreasing=%s, final/initial %.1e", vr.decreasing ? "yes" : "no",
                     vr.final_over_initial)};
}

}  // namespace

int main() {
  std::printf("acceptance suite: weighted composition laboratory\n");
  try {
    shared_kernel_table(kFlat);
    shared_kernel_table(kLab);
    shared_kernel_table(kSteep);
  } catch (const std::exception& e) {
    std::printf("[FAIL] kernel table warm-up: %s\n", e.what());
    return 12;
  }

  int failures = 0;
  failures += run(1, "kernel-closed-form", 10.0, kernel_closed_form);
  failures += run(2, "reproducing-property", 30.0, reproducing_property);
  failures += run(3, "berezin-area-identity", 60.0, berezin_area_identity);
  failures += run(4, "dilation-model", 120.0, dilation_model);
  failures += run(5, "classification-table", 300.0, classification_table);
  failures += run(6, "schatten-cross-check", 300.0, schatten_cross_check);
  failures += run(7, "covering-multiplicity", 60.0, covering_multiplicity);
  failures += run(8, "diagonal-comparison", 0.0, diagonal_comparison);
  failures += run(9, "offdiagonal-decay", 0.0, offdiagonal_decay);
  failures += run(10, "angular-derivatives", 0.0, angular_derivatives);
  failures += run(11, "bergman-distance", 0.0, bergman_distance_check);
  failures += run(12, "kernel-vanishing", 0.0, kernel_vanishing);

  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures;
}
