#pragma once

#include <vector>

#include "blab/types.hpp"

namespace blab {

// Analytic self-map of the unit disk. Instances are created through the
// factories, which run the numerical self-map certificate and reject maps
// whose modulus reaches 1 on the probe circle (automorphism-type families are
// admitted by construction, their certificate is recorded anyway).
struct MapSpec {
  enum class Kind { Polynomial, Dilation, HyperbolicAutomorphism, Moebius, Composite };

  Kind kind = Kind::Polynomial;
  std::vector<Point> coeffs;    // Polynomial: coeffs[k] multiplies z^k
  double r = 0.0;               // Dilation
  double a = 0.0;               // HyperbolicAutomorphism: z -> (z+a)/(1+a z)
  Point mu;                     // Moebius: z -> (z-mu)/(1-conj(mu) z)
  std::vector<MapSpec> parts;   // Composite: applied left to right
  double self_map_certificate = 0.0;  // max |phi| on 1e4 points of |z| = 1-1e-4
  bool known_family = false;

  static MapSpec identity();
  static MapSpec dilation(double r);
  static MapSpec polynomial(std::vector<Point> coeffs);
  static MapSpec hyperbolic(double a);
  static MapSpec moebius(Point mu);
  static MapSpec composite(std::vector<MapSpec> parts);

  Point eval(Point z) const;
  Point derivative(Point z) const;

  // True when the map sends every circle |z| = rho to a circle with uniformly
  // spaced angles, i.e. it is c*z^m up to representation. Fills c and m.
  bool monomial_form(Point& c, long long& m) const;
};

// Analytic multiplier. KernelPower is (K(xi,w)/K(w,w))^exponent; its
// evaluation needs a kernel table and lives with the operator code.
struct MultiplierSpec {
  enum class Kind { One, Polynomial, KernelPower };

  Kind kind = Kind::One;
  std::vector<Point> coeffs;
  Point w;
  double exponent = 1.0;

  static MultiplierSpec one();
  static MultiplierSpec polynomial(std::vector<Point> coeffs);
  static MultiplierSpec kernel_power(Point w, double exponent);

  bool is_one() const { return kind == Kind::One; }
  // c*z^m detection, same role as MapSpec::monomial_form.
  bool monomial_form(Point& c, long long& m) const;
  // Defined for One and Polynomial; KernelPower needs a table.
  Point eval(Point z) const;
};

struct BoundaryDiagnostics {
  Point zeta;
  double d_phi = 0.0;        // +inf when the quotient diverges
  bool finite = false;
  bool indeterminate = false;
  Point eta;                 // radial limit of phi, meaningful when finite
  double eta_modulus_error = 0.0;   // | |phi(z_40)| - 1 |
  double derivative_cross_check = 0.0;  // rel. gap between fd phi'(zeta) and d*conj(zeta)*eta
  std::vector<double> radial_quotients;  // q(z_j) along the radius, j = 4..40
};

// Quotient (1-|phi(z)|)/(1-|z|) along a radial ladder plus an angular fan
// inside the nontangential region of opening 2; d is the min of the tail
// estimates across the fan.
BoundaryDiagnostics angular_derivative(const MapSpec& phi, Point zeta);

struct RadialMax {
  double value = 0.0;
  double theta = 0.0;
};

// sup of |phi| on the circle of radius r: coarse angle sweep plus a local
// ternary refinement around the discrete maximizer.
RadialMax radial_max(const MapSpec& phi, double r, int n_angles);

enum class AngularVerdict { SomeDerivativeBelowOne, AllAboveOne, BoundaryCase, Indeterminate };

struct GlobalAngularReport {
  AngularVerdict verdict = AngularVerdict::Indeterminate;
  double min_finite_d = 0.0;
  bool any_infinite = false;
  std::vector<BoundaryDiagnostics> per_zeta;
};

GlobalAngularReport global_angular_verdict(const MapSpec& phi, int n_boundary);

}  // namespace blab
