#pragma once

#include <vector>

#include "blab/types.hpp"

namespace blab {

struct MapSpec;

enum class WeightKind { ExponentialType, TestUnweighted, TestStandard };

// Radial weight on the unit disk. The working family is
//   log w(r) = beta*log(1-r) - c/(1-r)^alpha
// with the two test kinds (Lebesgue and standard polynomial decay) kept only
// as oracle weights for cross-checks. All evaluation is done in log space;
// raw values of these weights underflow double long before r reaches 1.
struct WeightSpec {
  WeightKind kind = WeightKind::ExponentialType;
  double alpha = 1.0;
  double c = 1.0;
  double beta = 0.0;
  double gamma = 0.0;  // TestStandard exponent

  static WeightSpec exponential(double alpha, double c, double beta);
  static WeightSpec unweighted();
  static WeightSpec standard(double gamma);
};

struct TauConstants {
  double c1 = 0.0;     // sup tau(r)/(1-r)
  double c2 = 0.0;     // sup |tau'|, measured as the max finite-difference slope
  double m_tau = 0.0;  // min(1, 1/c1, 1/c2)/4
};

struct RegularityTrace {
  double delta = 0.0;
  int j_begin = 0;
  std::vector<double> log_ratios;  // log w(1-delta*t) - log w(1-t) at t = 2^-j
  bool decreasing = false;         // monotone decreasing for j >= 4
  bool below_threshold = false;    // final ratio < 1e-6
};

struct ClassWReport {
  TauConstants tau_constants;
  bool log_weight_strictly_decreasing = false;
  bool tau_decreasing = false;
  bool tau_prime_vanishes = false;
  bool tau_growth_side_condition = false;  // tau(r)*(1-r)^-(1+alpha/2) nondecreasing
  bool alt_side_condition = false;         // tau'(r)*log(1/tau(r)) -> 0 (reported only)
  std::vector<RegularityTrace> regularity;
  bool regular = false;  // all traces decreasing and below threshold
  bool in_class() const {
    return log_weight_strictly_decreasing && tau_decreasing && tau_prime_vanishes &&
           tau_growth_side_condition;
  }
};

// Combined ratio diagnostics between a point and its image under a self-map.
// The multiplier factor is supplied by the caller where needed.
struct RatioDiagnostics {
  double log_weight_ratio = 0.0;      // log w(|z|) - log w(|phi(z)|)
  double tau_ratio = 0.0;             // tau(|z|)/tau(|phi(z)|)
  double log_norm_factor = 0.0;       // log[ tau ratio * sqrt(weight ratio) ]
  double log_compact_factor = 0.0;    // log[ tau ratio^2 * weight ratio ]
};

// log w(r); throws DomainError outside [0,1).
double eval_log_weight(const WeightSpec& w, double r);

// log w(1-t) with t = 1-r passed directly. Boundary protocols use this form
// because recovering 1-r from r loses up to half the mantissa near r = 1.
double eval_log_weight_1m(const WeightSpec& w, double one_minus_r);

// tau(r) = (1-r)^(1+alpha/2) for the working family, 1-r for the test kinds.
double eval_tau(const WeightSpec& w, double r);
double eval_tau_1m(const WeightSpec& w, double one_minus_r);

// Radial derivative of tau (closed form).
double eval_tau_prime(const WeightSpec& w, double r);

// Measured Lipschitz data for tau on 1e4 Chebyshev-spaced points in [0, 1-1e-8].
TauConstants measure_tau_constants(const WeightSpec& w);

// At least 100 radii accumulating at 1, used as the default diagnostic grid.
std::vector<double> default_radial_grid();

ClassWReport check_class_W(const WeightSpec& w, const std::vector<double>& grid);

RatioDiagnostics weight_ratio_diag(const WeightSpec& w, const MapSpec& phi, Point z);

// Nested boundary rings for limit protocols: three radii between 1-eps0 and
// 1-eps1, geometrically interpolated. Defaults eps0 = 1e-2, eps1 = 1e-4.
std::vector<double> boundary_rings(double eps0 = 1e-2, double eps1 = 1e-4);

}  // namespace blab
