#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"

#include "blab/errors.hpp"
#include "blab/numerics.hpp"
#include "blab/types.hpp"
#include "blab/weights.hpp"
#include "oracles.hpp"

using namespace blab;
using C = std::complex<double>;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(5, x, w);
  REQUIRE(x.size() == 5);
  double s0 = 0.0, s2 = 0.0, s9 = 0.0, s10 = 0.0;
  for (int i = 0; i < 5; ++i) {
    s0 += w[i];
    s2 += w[i] * x[i] * x[i];
    s9 += w[i] * std::pow(x[i], 9);
    s10 += w[i] * std::pow(x[i], 10);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(std::abs(s9) < 1e-15);  // degree 9 = exactness limit of the 5-point rule
  CHECK(std::abs(s10 - 2.0 / 11.0) > 1e-8);  // degree 10 is beyond it
  CHECK_THROWS_AS(gauss_legendre(0, x, w), DomainError);
}

TEST_CASE("disk quadrature: normalization and first moments") {
  DiskQuadrature q = build_quadrature(32, 32, 1.0);
  double mass = 0.0, m2 = 0.0;
  C m31(0.0, 0.0);
  for (size_t i = 0; i < q.node_count(); ++i) {
    QuadratureNode n = q.node(i);
    mass += n.mass;
    m2 += n.mass * std::norm(n.point);
    m31 += n.mass * n.point * n.point * n.point * std::conj(n.point);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m2 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(m31) < 1e-14);
}

TEST_CASE("disk quadrature: polynomial exactness with boundary clustering") {
  DiskQuadrature q = build_quadrature(16, 24, 2.0);
  CHECK(q.boundary_exponent == 2);
  CHECK(q.requested_radial == 16);
  CHECK(q.n_radial >= 24);  // raised to keep the monomials exact
  for (int k = 0; k <= 11; ++k) {
    double mk = 0.0;
    for (size_t ring = 0; ring < q.ring_count(); ++ring) {
      mk += q.ring_mass[ring] * std::pow(q.radii[ring], 2 * k);
    }
    CHECK(mk == doctest::Approx(1.0 / (k + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("disk quadrature: nodes inside the disk, ring layout") {
  DiskQuadrature q = build_quadrature(20, 16, 3.0);
  for (size_t i = 0; i < q.ring_count(); ++i) {
    CHECK(q.radii[i] > 0.0);
    CHECK(q.radii[i] < 1.0);
    if (i > 0) CHECK(q.radii[i] > q.radii[i - 1]);
  }
  QuadratureNode n0 = q.node(0);
  QuadratureNode n1 = q.node(1);
  CHECK(std::abs(n0.point) == doctest::Approx(std::abs(n1.point)).epsilon(1e-15));
  CHECK(n0.mass == doctest::Approx(q.ring_mass[0] / 16.0).epsilon(1e-15));
  std::vector<QuadratureNode> all = q.materialize();
  CHECK(all.size() == q.node_count());
}

TEST_CASE("disk quadrature rejects invalid sizes") {
  CHECK_THROWS_AS(build_quadrature(8, 32, 1.0), ConfigError);
  CHECK_THROWS_AS(build_quadrature(32, 8, 1.0), ConfigError);
  CHECK_THROWS_AS(build_quadrature(32, 32, 0.5), ConfigError);
}

TEST_CASE("radial moments: closed forms") {
  CHECK(radial_moment(WeightSpec::unweighted(), 3, 1e-12) ==
        doctest::Approx(0.125).epsilon(1e-11));
  CHECK(radial_moment(WeightSpec::standard(1.0), 0, 1e-12) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-11));
  CHECK_THROWS_AS(radial_moment(WeightSpec::unweighted(), -1, 1e-10), DomainError);
  CHECK_THROWS_AS(radial_moment(WeightSpec::unweighted(), 1, 0.0), DomainError);
}

TEST_CASE("radial moments validated against the midpoint oracle") {
  for (double alpha : {1.0, 2.0}) {
    WeightSpec w = WeightSpec::exponential(alpha, 1.0, 0.0);
    for (long long k : {0LL, 1LL, 10LL, 100LL}) {
      double engine = radial_moment(w, k, 1e-10);
      double ref = oracle::midpoint_moment(w, k);
      CHECK(engine == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("log moment agrees with the plain moment") {
  WeightSpec w = WeightSpec::exponential(1.0, 1.0, 0.0);
  for (long long k : {0LL, 2LL, 25LL}) {
    CHECK(std::exp(log_radial_moment(w, k, 1e-11)) ==
          doctest::Approx(radial_moment(w, k, 1e-11)).epsilon(1e-13));
  }
}

TEST_CASE("batch norms match the adaptive engine") {
  WeightSpec w = WeightSpec::exponential(1.0, 1.0, 0.0);
  std::vector<double> batch = log_norms_batch(w, 500);
  REQUIRE(batch.size() == 501);
  for (long long k : {0LL, 1LL, 7LL, 100LL, 499LL}) {
    double ref = std::log(2.0) + log_radial_moment(w, k, 1e-12);
    CHECK(batch[size_t(k)] == doctest::Approx(ref).epsilon(5e-11));
  }

  WeightSpec w2 = WeightSpec::exponential(2.0, 0.5, 1.0);
  std::vector<double> batch2 = log_norms_batch(w2, 200);
  for (long long k : {0LL, 3LL, 60LL, 200LL}) {
    double ref = std::log(2.0) + log_radial_moment(w2, k, 1e-12);
    CHECK(batch2[size_t(k)] == doctest::Approx(ref).epsilon(5e-11));
  }
}

TEST_CASE("batch norms: closed forms for the test kinds") {
  std::vector<double> un = log_norms_batch(WeightSpec::unweighted(), 10);
  for (long long k = 0; k <= 10; ++k) {
    CHECK(un[size_t(k)] == doctest::Approx(-std::log(double(k) + 1.0)).epsilon(1e-14));
  }
  WeightSpec st = WeightSpec::standard(1.5);
  std::vector<double> stb = log_norms_batch(st, 40);
  for (long long k : {0LL, 3LL, 20LL, 40LL}) {
    double ref = std::log(2.0) + log_radial_moment(st, k, 1e-12);
    CHECK(stb[size_t(k)] == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("moments decrease in k") {
  for (WeightSpec w : {WeightSpec::exponential(2.0, 1.0, 0.0), WeightSpec::standard(1.0)}) {
    std::vector<double> b = log_norms_batch(w, 300);
    for (size_t k = 1; k < b.size(); ++k) CHECK(b[k] < b[k - 1]);
  }
}

TEST_CASE("extending a batch matches a fresh batch") {
  WeightSpec w = WeightSpec::exponential(1.0, 2.0, 0.0);
  std::vector<double> grown = log_norms_batch(w, 50);
  extend_log_norms_batch(w, grown, 120);
  std::vector<double> fresh = log_norms_batch(w, 120);
  REQUIRE(grown.size() == fresh.size());
  for (size_t k = 0; k < fresh.size(); ++k) {
    CHECK(grown[k] == doctest::Approx(fresh[k]).epsilon(1e-12));
  }
}

TEST_CASE("2-D rule and 1-D moments are consistent") {
  WeightSpec w = WeightSpec::exponential(2.0, 1.0, 0.0);
  DiskQuadrature q = build_quadrature(128, 16, 2.0);
  for (long long k : {0LL, 5LL, 20LL, 40LL}) {
    double q2d = 0.0;
    for (size_t ring = 0; ring < q.ring_count(); ++ring) {
      double r = q.radii[ring];
      q2d += q.ring_mass[ring] * std::pow(r, 2.0 * double(k)) *
             std::exp(eval_log_weight(w, r));
    }
    double ref = 2.0 * radial_moment(w, k, 1e-9);
    CHECK(q2d == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("eigenvalues of small closed-form matrices") {
  std::vector<C> diag{C(3, 0), C(0, 0), C(0, 0),
                      C(0, 0), C(1, 0), C(0, 0),
                      C(0, 0), C(0, 0), C(2, 0)};
  HermitianSpectrum s = hermitian_eigenvalues(diag, 3);
  REQUIRE(s.eigenvalues.size() == 3);
  CHECK(s.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(s.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(s.eigenvalues[2] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(s.dimension == 3);
  CHECK(s.residual < 1e-12);

  std::vector<C> flip{C(0, 0), C(1, 0), C(1, 0), C(0, 0)};
  HermitianSpectrum s2 = hermitian_eigenvalues(flip, 2);
  CHECK(s2.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(s2.eigenvalues[1] == doctest::Approx(-1.0).epsilon(1e-13));

  std::vector<C> herm{C(2, 0), C(0, 1), C(0, -1), C(2, 0)};
  HermitianSpectrum s3 = hermitian_eigenvalues(herm, 2);
  CHECK(s3.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(s3.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("geometric diagonal spectrum is recovered and stays nonnegative") {
  int n = 50;
  std::vector<C> m(size_t(n) * n, C(0, 0));
  for (int j = 0; j < n; ++j) m[size_t(j) * n + j] = C(std::pow(0.25, j), 0);
  HermitianSpectrum s = hermitian_eigenvalues(m, n);
  for (int j = 0; j < n; ++j) {
    CHECK(s.eigenvalues[j] == doctest::Approx(std::pow(0.25, j)).epsilon(1e-12));
  }
  CHECK(s.eigenvalues.back() >= -1e-10 * s.eigenvalues.front());
}

TEST_CASE("eigenvalue sum equals the trace") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int n = 30;
  std::vector<C> m(size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    m[size_t(i) * n + i] = C(u(rng), 0.0);
    for (int j = i + 1; j < n; ++j) {
      C v(u(rng), u(rng));
      m[size_t(i) * n + j] = v;
      m[size_t(j) * n + i] = std::conj(v);
    }
  }
  HermitianSpectrum s = hermitian_eigenvalues(m, n);
  double trace = 0.0, sum = 0.0, maxabs = 0.0;
  for (int i = 0; i < n; ++i) trace += m[size_t(i) * n + i].real();
  for (double ev : s.eigenvalues) sum += ev;
  for (const C& v : m) maxabs = std::max(maxabs, std::abs(v));
  CHECK(std::abs(sum - trace) <= 1e-10 * n * maxabs);
  double radius = std::max(std::abs(s.eigenvalues.front()), std::abs(s.eigenvalues.back()));
  CHECK(s.residual < 1e-8 * radius);
}

TEST_CASE("eigensolver contract violations") {
  std::vector<C> bad{C(0, 0), C(1, 0), C(0, 0), C(0, 0)};
  CHECK_THROWS_AS(hermitian_eigenvalues(bad, 2), ContractViolation);
  std::vector<C> wrong(5, C(0, 0));
  CHECK_THROWS_AS(hermitian_eigenvalues(wrong, 2), ConfigError);
  std::vector<C> big;
  CHECK_THROWS_AS(hermitian_eigenvalues(big, 401), ConfigError);
  CHECK_THROWS_AS(hermitian_eigenvalues(big, 0), ConfigError);
}

TEST_SUITE_END();
