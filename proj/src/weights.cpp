#include "blab/weights.hpp"

#include <algorithm>
#include <cmath>

#include "blab/errors.hpp"
#include "blab/symbols.hpp"

namespace blab {

WeightSpec WeightSpec::exponential(double alpha, double c, double beta) {
  if (!(alpha > 0.0) || !(c > 0.0) || !(beta >= 0.0))
    throw DomainError("exponential weight needs alpha > 0, c > 0, beta >= 0");
  WeightSpec w;
  w.kind = WeightKind::ExponentialType;
  w.alpha = alpha;
  w.c = c;
  w.beta = beta;
  return w;
}

WeightSpec WeightSpec::unweighted() {
  WeightSpec w;
  w.kind = WeightKind::TestUnweighted;
  w.alpha = 0.0;
  w.c = 0.0;
  return w;
}

WeightSpec WeightSpec::standard(double gamma) {
  if (!(gamma > 0.0)) throw DomainError("standard test weight needs gamma > 0");
  WeightSpec w;
  w.kind = WeightKind::TestStandard;
  w.alpha = 0.0;
  w.c = 0.0;
  w.gamma = gamma;
  return w;
}

static void require_radius(double r) {
  if (!(r >= 0.0) || !(r < 1.0)) throw DomainError("radius must lie in [0,1)");
}

double eval_log_weight_1m(const WeightSpec& w, double t) {
  if (!(t > 0.0) || !(t <= 1.0)) throw DomainError("1-r must lie in (0,1]");
  switch (w.kind) {
    case WeightKind::TestUnweighted:
      return 0.0;
    case WeightKind::TestStandard:
      return w.gamma * std::log(t);
    case WeightKind::ExponentialType:
      break;
  }
  double decay;
  if (w.alpha == 1.0)
    decay = w.c / t;
  else if (w.alpha == 2.0)
    decay = w.c / (t * t);
  else
    decay = w.c * std::pow(t, -w.alpha);
  return (w.beta == 0.0 ? 0.0 : w.beta * std::log(t)) - decay;
}

double eval_log_weight(const WeightSpec& w, double r) {
  require_radius(r);
  return eval_log_weight_1m(w, 1.0 - r);
}

double eval_tau_1m(const WeightSpec& w, double t) {
  if (!(t > 0.0) || !(t <= 1.0)) throw DomainError("1-r must lie in (0,1]");
  if (w.kind != WeightKind::ExponentialType) return t;
  return std::pow(t, 1.0 + 0.5 * w.alpha);
}

double eval_tau(const WeightSpec& w, double r) {
  require_radius(r);
  return eval_tau_1m(w, 1.0 - r);
}

double eval_tau_prime(const WeightSpec& w, double r) {
  require_radius(r);
  if (w.kind != WeightKind::ExponentialType) return -1.0;
  double e = 1.0 + 0.5 * w.alpha;
  return -e * std::pow(1.0 - r, e - 1.0);
}

TauConstants measure_tau_constants(const WeightSpec& w) {
  const int n = 10000;
  const double r_max = 1.0 - 1e-8;
  TauConstants out;
  double prev_r = 0.0;
  double prev_tau = eval_tau(w, 0.0);
  out.c1 = prev_tau / 1.0;
  for (int i = 1; i < n; ++i) {
    // Chebyshev spacing clusters samples at both ends of [0, r_max].
    double x = 0.5 * (1.0 - std::cos(kPi * double(i) / double(n - 1)));
    double r = x * r_max;
    double tau = eval_tau(w, r);
    out.c1 = std::max(out.c1, tau / (1.0 - r));
    out.c2 = std::max(out.c2, std::fabs(tau - prev_tau) / (r - prev_r));
    prev_r = r;
    prev_tau = tau;
  }
  out.m_tau = std::min(1.0, std::min(1.0 / out.c1, 1.0 / out.c2)) / 4.0;
  return out;
}

std::vector<double> default_radial_grid() {
  // Ten radii per octave of 1-r, down to 1-r ~ 2^-30. The tau'-vanishing
  // check needs depth ~ (threshold)^(2/alpha), so this covers alpha >= 1/2.
  std::vector<double> grid;
  grid.reserve(300);
  for (int i = 0; i < 300; ++i) grid.push_back(1.0 - std::pow(2.0, -double(i) / 10.0));
  return grid;
}

ClassWReport check_class_W(const WeightSpec& w, const std::vector<double>& grid) {
  if (grid.size() < 100) throw DomainError("class check needs a grid of at least 100 radii");
  ClassWReport rep;
  rep.tau_constants = measure_tau_constants(w);

  rep.log_weight_strictly_decreasing = (w.kind == WeightKind::ExponentialType);
  rep.tau_decreasing = true;
  rep.tau_growth_side_condition = true;
  for (size_t i = 1; i < grid.size(); ++i) {
    double r0 = grid[i - 1], r1 = grid[i];
    if (r1 <= r0) continue;
    if (w.kind == WeightKind::ExponentialType &&
        !(eval_log_weight(w, r0) > eval_log_weight(w, r1)))
      rep.log_weight_strictly_decreasing = false;
    if (!(eval_tau(w, r0) > eval_tau(w, r1))) rep.tau_decreasing = false;
    double e = (w.kind == WeightKind::ExponentialType) ? 1.0 + 0.5 * w.alpha : 1.0;
    double g0 = eval_tau(w, r0) * std::pow(1.0 - r0, -e);
    double g1 = eval_tau(w, r1) * std::pow(1.0 - r1, -e);
    if (g1 < g0 * (1.0 - 1e-12)) rep.tau_growth_side_condition = false;
  }

  double tp_first = std::fabs(eval_tau_prime(w, grid.front()));
  double tp_last = std::fabs(eval_tau_prime(w, grid.back()));
  rep.tau_prime_vanishes =
      (w.kind == WeightKind::ExponentialType) && tp_last < 1e-2 * std::max(tp_first, 1e-30);

  {
    double r = grid.back();
    double tau = eval_tau(w, r);
    double alt = std::fabs(eval_tau_prime(w, r)) * std::log(1.0 / tau);
    rep.alt_side_condition = alt < 1e-2;
  }

  rep.regular = true;
  for (double delta : {0.25, 0.5, 0.75}) {
    RegularityTrace trace;
    trace.delta = delta;
    trace.j_begin = 4;
    trace.decreasing = true;
    double prev = 0.0;
    for (int j = 4; j <= 40; ++j) {
      double t = std::pow(2.0, -j);
      double lr = eval_log_weight_1m(w, delta * t) - eval_log_weight_1m(w, t);
      trace.log_ratios.push_back(lr);
      if (j > 4 && !(lr < prev)) trace.decreasing = false;
      prev = lr;
    }
    trace.below_threshold = trace.log_ratios.back() < std::log(1e-6);
    rep.regular = rep.regular && trace.decreasing && trace.below_threshold;
    rep.regularity.push_back(std::move(trace));
  }
  return rep;
}

RatioDiagnostics weight_ratio_diag(const WeightSpec& w, const MapSpec& phi, Point z) {
  if (!(std::abs(z) < 1.0)) throw DomainError("ratio diagnostics need |z| < 1");
  Point fz = phi.eval(z);
  if (!(std::abs(fz) < 1.0)) throw NotSelfMapError("map sends the point outside the disk");
  RatioDiagnostics d;
  double rz = std::abs(z), rf = std::abs(fz);
  d.log_weight_ratio = eval_log_weight(w, rz) - eval_log_weight(w, rf);
  d.tau_ratio = eval_tau(w, rz) / eval_tau(w, rf);
  double log_tau_ratio = std::log(d.tau_ratio);
  d.log_norm_factor = log_tau_ratio + 0.5 * d.log_weight_ratio;
  d.log_compact_factor = 2.0 * log_tau_ratio + d.log_weight_ratio;
  return d;
}

std::vector<double> boundary_rings(double eps0, double eps1) {
  if (!(eps0 > eps1) || !(eps1 > 0.0) || !(eps0 < 1.0))
    throw DomainError("boundary rings need 0 < eps1 < eps0 < 1");
  std::vector<double> rings;
  for (int i = 0; i < 3; ++i) {
    double eps = eps0 * std::pow(eps1 / eps0, double(i) / 2.0);
    rings.push_back(1.0 - eps);
  }
  return rings;
}

}  // namespace blab
