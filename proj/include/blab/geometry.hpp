#pragma once

#include <vector>

#include "blab/types.hpp"
#include "blab/weights.hpp"

namespace blab {

struct MapSpec;

// Euclidean disk D(delta*tau(center)) adapted to the weight's length scale.
struct AdaptedDisk {
  Point center;
  double delta = 0.0;
  double radius = 0.0;  // delta * tau(center)

  bool contains(Point z) const { return std::abs(z - center) < radius; }
  double normalized_area() const { return radius * radius; }
};

// Validates delta against the weight's m_tau and the unit-disk containment.
AdaptedDisk adapted_disk(const WeightSpec& w, Point center, double delta);

// Largest admissible delta for adapted disks, min(1, 1/C1, 1/C2)/4.
double max_delta(const WeightSpec& w);

struct ComparabilityBounds {
  double min_ratio = 0.0;  // min tau(z)/tau(a) over the adapted disk
  double max_ratio = 0.0;
  bool within_half_two = false;
};

ComparabilityBounds comparability_check(const WeightSpec& w, Point a, double delta, int samples);

// Greedy delta-sequence on a truncated disk, certified on its own grid.
struct CoveringSequence {
  double delta = 0.0;
  double epsilon = 0.0;
  int grid_n = 0;
  std::vector<Point> points;
  int multiplicity = 0;  // max disks D(3 delta tau(a_k)) sharing a grid point
  long long separation_violations = 0;
  long long uncovered_points = 0;
};

// grid_n = 0 derives the grid from the pitch rule delta*tau(1-eps)/4 and
// throws ResolutionError when that needs more than 1600 points per side.
CoveringSequence build_covering(const WeightSpec& w, double delta, double epsilon,
                                int grid_n = 0);

struct BergmanDistance {
  double graph = 0.0;    // shortest path value, an upper bound
  double segment = 0.0;  // straight-segment upper bound
};

// Path distance for the metric |dz|/tau on a polar graph whose radial spacing
// follows tau. level 0/1/2 selects nested refinements of one ladder, so the
// value is nonincreasing in level.
BergmanDistance bergman_distance(const WeightSpec& w, Point z, Point xi, int level = 2);

// One Dijkstra run from z against many targets; same semantics per target.
std::vector<BergmanDistance> bergman_distances(const WeightSpec& w, Point z,
                                               const std::vector<Point>& targets, int level = 2);

// Horodisk E(zeta,k), internally tangent to the circle at zeta.
struct Horodisk {
  Point zeta;
  double k = 1.0;

  Point center() const { return zeta / (k + 1.0); }
  double radius() const { return k / (1.0 + k); }
  bool contains_quadratic(Point z) const {
    return std::norm(zeta - z) <= k * (1.0 - std::norm(z));
  }
  bool contains_euclidean(Point z) const { return std::abs(center() - z) <= radius(); }
};

struct JuliaReport {
  double max_ratio = 0.0;
  Point eta;        // radial limit of phi at zeta
  int samples_used = 0;
  bool holds = false;  // max_ratio <= 1 + 1e-6
};

// Samples each E(zeta,k) and checks the Julia quotient against d.
JuliaReport julia_containment(const MapSpec& phi, Point zeta, double d,
                              const std::vector<double>& k_values, int samples);

// Membership in Gamma(zeta, alpha) = { z : |z - zeta| < alpha (1 - |z|) }.
bool nontangential_region(Point zeta, double alpha, Point z);

}  // namespace blab
