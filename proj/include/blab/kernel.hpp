#pragma once

#include <string>
#include <utility>
#include <vector>

#include "blab/types.hpp"
#include "blab/weights.hpp"

namespace blab {

// Monomial-basis table for one weight: log ||z^k||^2 = log(2 p_k) up to a
// truncation certified for kernel evaluation on |z * conj(xi)| <= rho_cert.
struct KernelTable {
  WeightSpec weight;
  long long k_max = 0;
  double rho_cert = 0.0;
  double r_eval = 0.0;     // sqrt(rho_cert), the per-argument radius
  double tail_ratio = 0.0; // rho_cert^k_max/(2 p_{k_max}) relative to K(r_eval, r_eval)
  std::vector<double> log_norms;
};

// Grows k_max until the tail term sits 18 decades under the diagonal peak,
// which keeps the recorded tail_ratio safely below the 1e-14 certificate.
KernelTable build_kernel_table(const WeightSpec& w, double rho_cert, long long min_k_max = 0);

// Product radius large enough for every boundary protocol this library runs.
double default_rho_cert(const WeightSpec& w);

// Process-wide immutable table cache; honors BLAB_CACHE_DIR for reuse across
// runs (tables are stored as JSON and validated on load).
const KernelTable& shared_kernel_table(const WeightSpec& w, double rho_cert);
const KernelTable& shared_kernel_table(const WeightSpec& w);

// JSON round trip. Norms are stored as log(2 p_k); the raw moments underflow
// double range long before the truncation order needed by fast weights.
void export_kernel_table(const KernelTable& t, const std::string& path);
KernelTable import_kernel_table(const std::string& path);

// K(z, xi) = sum (z conj(xi))^k / (2 p_k). Conjugate-symmetric exactly.
Point kernel_eval(const KernelTable& t, Point z, Point xi);
LogComplex kernel_eval_log(const KernelTable& t, Point z, Point xi);

// log K(z, z) for |z| = r; finite far beyond double range for K itself.
double kernel_log_diag(const KernelTable& t, double r);

// log sum_k x^{2k}/(2 p_k)^2, the exact angular mean of |K(z, xi)|^2 over a
// ring pair with x = |z| |xi|.
double kernel_log_pair_l2(const KernelTable& t, double x);

// Number of coefficients that carry the series at product radius x: the top
// edge of the summation window at the certified tail margin, plus one.
long long kernel_series_extent(const KernelTable& t, double x);

// k_z(xi) = K(xi, z)/sqrt(K(z, z)).
Point normalized_kernel(const KernelTable& t, Point z, Point xi);
LogComplex normalized_kernel_log(const KernelTable& t, Point z, Point xi);

struct DiagonalEstimate {
  double delta = 0.0;      // disks D(delta tau(z)) were sampled
  double ratio_min = 0.0;  // |K(z,xi)|^2/(K(z,z)K(xi,xi))
  double ratio_max = 0.0;
  double diag_min = 0.0;   // K(z,z) omega(z) tau(z)^2
  double diag_max = 0.0;
};

DiagonalEstimate check_diagonal_estimate(const KernelTable& t, const std::vector<double>& ring,
                                         double delta);

struct OffDiagonalDecay {
  double sigma = 0.0;      // slope of -log gain against graph distance, x > 2 pairs
  double r_squared = 0.0;
  double envelope = 0.0;   // C with y <= C - sigma x / 2 on every used pair
  int pairs_used = 0;
  int pairs_fit = 0;
  int pairs_skipped = 0;   // kernel underflow
};

OffDiagonalDecay check_offdiagonal_decay(const KernelTable& t,
                                         const std::vector<std::pair<Point, Point>>& pairs);

struct VanishingReport {
  std::vector<double> max_values;  // max |k_{z_n}| over the compact grid
  bool decreasing = false;         // along the subsequence with |z_n| >= 0.9
  double final_over_initial = 0.0;
};

VanishingReport kernel_vanishing_on_compacts(const KernelTable& t, double compact_radius,
                                             const std::vector<Point>& z_sequence);

}  // namespace blab
