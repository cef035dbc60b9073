#pragma once

#include <complex>
#include <string>
#include <vector>

#include "blab/types.hpp"
#include "blab/weights.hpp"

namespace blab {

// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct QuadratureNode {
  Point point;
  double mass;
};

// Tensor rule against normalized area measure: Gauss-Legendre in the
// transformed radial variable s with r = 1-(1-s)^b, uniform angles. Nodes are
// stored ring-implicitly (radii plus per-ring mass); a ring's mass is split
// evenly over its n_angular angles theta_j = 2 pi j / n_angular.
struct DiskQuadrature {
  std::string radial_rule;
  int n_radial = 0;       // effective count after the exactness bump
  int requested_radial = 0;
  int n_angular = 0;
  int boundary_exponent = 1;
  std::vector<double> radii;      // increasing
  std::vector<double> ring_mass;  // sums to 1

  size_t ring_count() const { return radii.size(); }
  size_t node_count() const { return radii.size() * size_t(n_angular); }
  QuadratureNode node(size_t i) const;
  std::vector<QuadratureNode> materialize() const;
};

// The rule integrates z^j conj(z)^k exactly (1e-12) for j,k <= n_angular/2 - 1.
// boundary_exponent is rounded to the nearest integer >= 1 and the radial
// count is raised when needed so the polynomial exactness holds.
DiskQuadrature build_quadrature(int n_radial, int n_angular, double boundary_exponent);

// p_k = int_0^1 s^{2k+1} w(s) ds with relative error <= tol, by adaptive
// panels in t = 1-s around the integrand's peak. The plain version returns the
// raw value (which underflows for large k with fast weights); the log version
// is always usable.
double radial_moment(const WeightSpec& w, long long k, double tol);
double log_radial_moment(const WeightSpec& w, long long k, double tol);

// log(2 p_k) for k = 0..k_max in one pass, with warm-started peak tracking.
std::vector<double> log_norms_batch(const WeightSpec& w, long long k_max);
// Extends an existing batch in place to new_k_max.
void extend_log_norms_batch(const WeightSpec& w, std::vector<double>& log2p, long long new_k_max);

struct HermitianSpectrum {
  std::vector<double> eigenvalues;  // descending
  int dimension = 0;
  double residual = 0.0;  // max ||M v - lambda v|| over computed pairs
};

// Full spectrum of a Hermitian matrix, entries row-major, dimension <= 400.
HermitianSpectrum hermitian_eigenvalues(const std::vector<std::complex<double>>& entries, int n);

}  // namespace blab
