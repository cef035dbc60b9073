#include "blab/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blab/errors.hpp"

namespace blab {

static Point horner(const std::vector<Point>& coeffs, Point z) {
  Point acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Point MapSpec::eval(Point z) const {
  switch (kind) {
    case Kind::Polynomial:
      return horner(coeffs, z);
    case Kind::Dilation:
      return r * z;
    case Kind::HyperbolicAutomorphism:
      return (z + a) / (1.0 + a * z);
    case Kind::Moebius:
      return (z - mu) / (1.0 - std::conj(mu) * z);
    case Kind::Composite: {
      Point w = z;
      for (const auto& p : parts) w = p.eval(w);
      return w;
    }
  }
  return z;
}

Point MapSpec::derivative(Point z) const {
  switch (kind) {
    case Kind::Polynomial: {
      Point acc = 0.0;
      for (size_t k = coeffs.size(); k-- > 1;)
        acc = acc * z + double(k) * coeffs[k];
      return acc;
    }
    case Kind::Dilation:
      return r;
    case Kind::HyperbolicAutomorphism: {
      Point d = 1.0 + a * z;
      return (1.0 - a * a) / (d * d);
    }
    case Kind::Moebius: {
      Point d = 1.0 - std::conj(mu) * z;
      return (1.0 - std::norm(mu)) / (d * d);
    }
    case Kind::Composite: {
      Point w = z;
      Point deriv = 1.0;
      for (const auto& p : parts) {
        deriv *= p.derivative(w);
        w = p.eval(w);
      }
      return deriv;
    }
  }
  return 1.0;
}

static double certificate(const MapSpec& m) {
  const int n = 10000;
  const double rho = 1.0 - 1e-4;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    Point z = std::polar(rho, 2.0 * kPi * double(i) / double(n));
    worst = std::max(worst, std::abs(m.eval(z)));
  }
  return worst;
}

static MapSpec certify(MapSpec m, bool known) {
  m.known_family = known;
  m.self_map_certificate = certificate(m);
  if (!known && !(m.self_map_certificate < 1.0))
    throw NotSelfMapError("map modulus reaches 1 on the certification circle");
  if (known && !(m.self_map_certificate <= 1.0 + 1e-12))
    throw NotSelfMapError("family parameters do not give a self-map");
  return m;
}

MapSpec MapSpec::identity() {
  MapSpec m;
  m.kind = Kind::Polynomial;
  m.coeffs = {Point(0.0), Point(1.0)};
  return certify(std::move(m), true);
}

MapSpec MapSpec::dilation(double r) {
  if (!(r > 0.0) || !(r < 1.0)) throw DomainError("dilation factor must lie in (0,1)");
  MapSpec m;
  m.kind = Kind::Dilation;
  m.r = r;
  return certify(std::move(m), true);
}

MapSpec MapSpec::polynomial(std::vector<Point> coeffs) {
  MapSpec m;
  m.kind = Kind::Polynomial;
  m.coeffs = std::move(coeffs);
  return certify(std::move(m), false);
}

MapSpec MapSpec::hyperbolic(double a) {
  if (!(std::fabs(a) < 1.0)) throw DomainError("automorphism parameter must satisfy |a| < 1");
  MapSpec m;
  m.kind = Kind::HyperbolicAutomorphism;
  m.a = a;
  return certify(std::move(m), true);
}

MapSpec MapSpec::moebius(Point mu) {
  if (!(std::abs(mu) < 1.0)) throw DomainError("Moebius parameter must satisfy |mu| < 1");
  MapSpec m;
  m.kind = Kind::Moebius;
  m.mu = mu;
  return certify(std::move(m), true);
}

MapSpec MapSpec::composite(std::vector<MapSpec> parts) {
  if (parts.empty()) throw DomainError("composite map needs at least one part");
  MapSpec m;
  m.kind = Kind::Composite;
  m.parts = std::move(parts);
  return certify(std::move(m), false);
}

bool MapSpec::monomial_form(Point& c, long long& m) const {
  switch (kind) {
    case Kind::Dilation:
      c = r;
      m = 1;
      return true;
    case Kind::Polynomial: {
      long long deg = -1;
      for (size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] != Point(0.0)) {
          if (deg >= 0) return false;
          deg = (long long)k;
        }
      }
      if (deg < 0) return false;  // the zero map is not useful as a ring map
      c = coeffs[(size_t)deg];
      m = deg;
      return true;
    }
    case Kind::Composite: {
      Point ctotal = 1.0;
      long long mtotal = 1;
      for (const auto& p : parts) {
        Point cp;
        long long mp;
        if (!p.monomial_form(cp, mp)) return false;
        // z -> cp * (ctotal z^mtotal)^mp
        Point cpow = 1.0;
        for (long long i = 0; i < mp; ++i) cpow *= ctotal;
        ctotal = cp * cpow;
        mtotal *= mp;
      }
      c = ctotal;
      m = mtotal;
      return true;
    }
    default:
      return false;
  }
}

MultiplierSpec MultiplierSpec::one() { return MultiplierSpec{}; }

MultiplierSpec MultiplierSpec::polynomial(std::vector<Point> coeffs) {
  MultiplierSpec u;
  u.kind = Kind::Polynomial;
  u.coeffs = std::move(coeffs);
  return u;
}

MultiplierSpec MultiplierSpec::kernel_power(Point w, double exponent) {
  if (!(std::abs(w) < 1.0)) throw DomainError("kernel power base point must lie in the disk");
  MultiplierSpec u;
  u.kind = Kind::KernelPower;
  u.w = w;
  u.exponent = exponent;
  return u;
}

bool MultiplierSpec::monomial_form(Point& c, long long& m) const {
  if (kind == Kind::One) {
    c = 1.0;
    m = 0;
    return true;
  }
  if (kind != Kind::Polynomial) return false;
  long long deg = -1;
  for (size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] != Point(0.0)) {
      if (deg >= 0) return false;
      deg = (long long)k;
    }
  }
  if (deg < 0) {
    c = 0.0;
    m = 0;
    return true;
  }
  c = coeffs[(size_t)deg];
  m = deg;
  return true;
}

Point MultiplierSpec::eval(Point z) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::Polynomial:
      return horner(coeffs, z);
    case Kind::KernelPower:
      throw DomainError("kernel power multiplier needs a kernel table to evaluate");
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// Boundary diagnostics

namespace {

struct RaySample {
  double q;        // (1-|phi(z)|)/(1-|z|)
  Point phi_z;
};

RaySample ray_sample(const MapSpec& phi, Point zeta, double t, double psi) {
  // z = zeta * (1 - t e^{i psi}); 1-|z|^2 = t(2 cos psi - t) exactly.
  Point z = zeta * (1.0 - std::polar(t, psi));
  double one_minus_z2 = t * (2.0 * std::cos(psi) - t);
  double abs_z = std::abs(z);
  double one_minus_z = one_minus_z2 / (1.0 + abs_z);
  Point fz = phi.eval(z);
  double one_minus_f2 = 1.0 - std::norm(fz);
  double one_minus_f = one_minus_f2 / (1.0 + std::abs(fz));
  return {one_minus_f / one_minus_z, fz};
}

}  // namespace

BoundaryDiagnostics angular_derivative(const MapSpec& phi, Point zeta) {
  BoundaryDiagnostics out;
  out.zeta = zeta;

  const int j_lo = 4, j_hi = 40, tail = 8;
  const double fan[] = {0.0, kPi / 6.0, -kPi / 6.0, 5.0 * kPi / 18.0, -5.0 * kPi / 18.0};

  std::vector<Point> radial_phi(j_hi + 1);
  double d_est = std::numeric_limits<double>::infinity();
  bool all_rays_blow_up = true;
  bool any_oscillation = false;

  for (double psi : fan) {
    std::vector<double> qs;
    for (int j = j_lo; j <= j_hi; ++j) {
      double t = std::pow(2.0, -j);
      RaySample s = ray_sample(phi, zeta, t, psi);
      qs.push_back(s.q);
      if (psi == 0.0) {
        radial_phi[j] = s.phi_z;
        out.radial_quotients.push_back(s.q);
      }
    }
    double tail_min = std::numeric_limits<double>::infinity();
    double tail_max = 0.0;
    bool increasing = true;
    for (size_t i = qs.size() - tail; i < qs.size(); ++i) {
      tail_min = std::min(tail_min, qs[i]);
      tail_max = std::max(tail_max, qs[i]);
      if (i > qs.size() - tail && qs[i] < qs[i - 1] * (1.0 - 1e-9)) increasing = false;
    }
    bool blows_up = tail_min > 100.0 && increasing;
    all_rays_blow_up = all_rays_blow_up && blows_up;
    if (!blows_up) {
      d_est = std::min(d_est, tail_min);
      if (tail_max > tail_min * 1.5 && !increasing) any_oscillation = true;
    }
  }

  if (all_rays_blow_up) {
    out.d_phi = std::numeric_limits<double>::infinity();
    out.finite = false;
    return out;
  }
  if (any_oscillation) {
    out.indeterminate = true;
    out.d_phi = d_est;
    return out;
  }

  out.d_phi = d_est;
  out.finite = true;
  Point f40 = radial_phi[j_hi];
  out.eta = f40 / std::abs(f40);
  out.eta_modulus_error = std::fabs(std::abs(f40) - 1.0);

  // Finite-difference derivative along the radius against d * conj(zeta) * eta.
  Point z36 = zeta * (1.0 - std::pow(2.0, -36));
  Point z40 = zeta * (1.0 - std::pow(2.0, -40));
  Point fd = (radial_phi[36] - radial_phi[40]) / (z36 - z40);
  Point predicted = out.d_phi * std::conj(zeta) * out.eta;
  out.derivative_cross_check = std::abs(fd - predicted) / std::max(std::abs(predicted), 1e-300);
  return out;
}

RadialMax radial_max(const MapSpec& phi, double r, int n_angles) {
  if (!(r > 0.0) || !(r < 1.0)) throw DomainError("radial max needs r in (0,1)");
  if (n_angles < 4) throw DomainError("radial max needs at least 4 angles");
  auto modulus = [&](double theta) { return std::abs(phi.eval(std::polar(r, theta))); };
  RadialMax best;
  for (int i = 0; i < n_angles; ++i) {
    double theta = 2.0 * kPi * double(i) / double(n_angles);
    double v = modulus(theta);
    if (v > best.value) {
      best.value = v;
      best.theta = theta;
    }
  }
  double step = 2.0 * kPi / double(n_angles);
  double lo = best.theta - step, hi = best.theta + step;
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (modulus(m1) < modulus(m2))
      lo = m1;
    else
      hi = m2;
  }
  double theta = 0.5 * (lo + hi);
  double v = modulus(theta);
  if (v > best.value) {
    best.value = v;
    best.theta = theta;
  }
  return best;
}

GlobalAngularReport global_angular_verdict(const MapSpec& phi, int n_boundary) {
  if (n_boundary < 1) throw DomainError("global angular verdict needs at least one point");
  GlobalAngularReport rep;
  rep.min_finite_d = std::numeric_limits<double>::infinity();
  bool any_indeterminate = false;
  bool all_above = true;
  bool some_below = false;
  const double tol = 1e-2;

  for (int i = 0; i < n_boundary; ++i) {
    Point zeta = std::polar(1.0, 2.0 * kPi * double(i) / double(n_boundary));
    BoundaryDiagnostics d = angular_derivative(phi, zeta);
    if (d.indeterminate) any_indeterminate = true;
    if (d.finite) {
      rep.min_finite_d = std::min(rep.min_finite_d, d.d_phi);
      if (d.d_phi < 1.0 - tol) some_below = true;
      if (!(d.d_phi > 1.0 + tol)) all_above = false;
    } else if (!d.indeterminate) {
      rep.any_infinite = true;
    }
    rep.per_zeta.push_back(std::move(d));
  }

  if (any_indeterminate)
    rep.verdict = AngularVerdict::Indeterminate;
  else if (some_below)
    rep.verdict = AngularVerdict::SomeDerivativeBelowOne;
  else if (all_above)
    rep.verdict = AngularVerdict::AllAboveOne;
  else
    rep.verdict = AngularVerdict::BoundaryCase;
  return rep;
}

}  // namespace blab
