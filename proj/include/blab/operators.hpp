#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "blab/kernel.hpp"
#include "blab/numerics.hpp"
#include "blab/symbols.hpp"
#include "blab/types.hpp"
#include "blab/weights.hpp"

namespace blab {

// Atomic positive measure on the disk. Masses are stored as logarithms so
// that pullbacks of fast weights survive the omega ratio near the boundary;
// an atom with log mass -inf is treated as absent.
struct DiscreteMeasure {
  std::vector<Point> points;
  std::vector<double> log_mass;
  // Local sampling scale per atom when the measure discretizes a continuous
  // one: the node spacing of the source rule. Empty means the atoms are exact
  // point masses. When nonempty the size matches points.
  std::vector<double> resolution;

  std::size_t size() const { return points.size(); }

  static DiscreteMeasure area(const DiskQuadrature& q);
  static DiscreteMeasure single_atom(Point z, double mass);
};

// Pushforward of |u|^2 omega dA under phi with the target weight divided out
// atom by atom. Change of variables makes berezin on this measure agree with
// phi_berezin on the same rule to rounding.
DiscreteMeasure pullback_measure(const WeightSpec& w, const DiskQuadrature& q, const MapSpec& phi,
                                 const MultiplierSpec& u);

// mu-tilde(z) = sum_i m_i |k_z(x_i)|^2 omega(x_i).
double berezin(const KernelTable& t, const DiscreteMeasure& mu, Point z);
double berezin_log(const KernelTable& t, const DiscreteMeasure& mu, Point z);

// Berezin transform of normalized area measure with the angular integral
// folded in closed form per ring. Near the boundary the integrand oscillates
// faster than any practical angular rule resolves; the fold is exact there.
double berezin_area(const KernelTable& t, const DiskQuadrature& q, Point z);

// mu(D(z, delta tau(z))) / (delta tau(z))^2 with mass in normalized area.
double averaging(const WeightSpec& w, const DiscreteMeasure& mu, Point z, double delta);

struct CarlesonReport {
  double delta = 0.0;
  double log_sup_berezin = kNegInf;    // over the radial test grid
  double log_sup_averaging = kNegInf;  // over the grid and the atom sites
  double log_sup_sequence = kNegInf;   // over the covering sequence
  double ratio_constant = 0.0;         // sup of mu-hat / mu-tilde on the grid
  std::size_t grid_points = 0;
  std::size_t sequence_points = 0;
  // Probes whose ball is narrower than the resolution of an atom inside it
  // say nothing about the measure being discretized; they are left out of
  // every sup and counted here. Zero for exact atomic measures.
  std::size_t unresolved_probes = 0;
};

// The three Carleson functionals side by side: they stay bounded together or
// blow up together, and the report carries the empirical constants.
CarlesonReport carleson_diagnostics(const KernelTable& t, const DiscreteMeasure& mu, double delta);

// B_phi(|u|^2)(z) on an explicit rule: sum_i w_i |u(x_i)|^2 |k_z(phi(x_i))|^2
// omega(x_i). Identical arithmetic to berezin over pullback_measure, which is
// the consistency check both routes must pass.
double phi_berezin(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi, Point z,
                   const DiskQuadrature& q);

// |u(z)|^2 K(phi(z), phi(z)) / K(z, z), the norm of the adjoint applied to a
// normalized kernel.
double adjoint_kernel_norm(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                           Point z);

// Dense complex matrix, row major.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Point> a;

  Point at(std::size_t j, std::size_t k) const { return a[j * cols + k]; }
};

// Matrix of u C_phi against the normalized monomial basis: column k holds the
// coefficients of u * phi^k rescaled by the norm ratio, rows covering the full
// expansion of every column. Entries come from Taylor data, so polynomial and
// automorphism symbols are exact up to a relative coefficient cutoff of 1e-26.
// KernelPower multipliers have no finite expansion here and raise ConfigError.
DenseMatrix galerkin_matrix(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                            int n_cols);

// M[j][k] = sum_i m_i e_j(x_i) conj(e_k(x_i)) omega(x_i), the compression of
// the Toeplitz form of mu to the first n basis vectors. Hermitian and PSD.
DenseMatrix toeplitz_matrix(const KernelTable& t, const DiscreteMeasure& mu, int n);

// Largest singular value of the columns k >= n of the n_total-column model,
// i.e. the norm of u C_phi restricted to the high-index tail.
double tail_projection_norm(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                            int n, int n_total);

enum class BoundVerdict { Bounded, Unbounded, Indeterminate };
enum class CompactVerdict { Compact, NotCompact, Indeterminate };
enum class SpVerdict { Finite, Infinite, Indeterminate };

const char* to_string(BoundVerdict v);
const char* to_string(CompactVerdict v);
const char* to_string(SpVerdict v);

struct ClassifyOptions {
  // Ring scheme for symbols with an exact angular reduction (c z^m pairs) and
  // for everything else; the second stays shallower because the coefficient
  // model is certified only inside the table radius.
  std::vector<double> radial_rings{0.90, 0.95, 0.99};
  std::vector<double> model_rings{0.80, 0.88, 0.96};
  int ring_angles = 32;
  // Truncation order for Schatten and tail computations; the convergence
  // rerun uses twice this, which must stay within the dense solver cap.
  int galerkin_dim = 200;
  // Multiplicative gap reported between the essential norm bracket ends.
  double c_upper = 10.0;
  // Exhaustion ladders for the partial-integral criteria.
  std::vector<double> radial_ladder{0.5, 0.7, 0.85, 0.925, 0.96, 0.99};
  std::vector<double> model_ladder{0.5, 0.65, 0.775, 0.85, 0.90};
};

// Ring statistics of B_phi(|u|^2); radial means the exact angular reduction
// was applied and each ring carries a single value.
struct RingSweep {
  std::vector<double> radii;
  std::vector<double> log_sup;
  int angles = 0;
  bool radial = false;
};

struct BoundednessReport {
  BoundVerdict verdict = BoundVerdict::Indeterminate;
  RingSweep sweep;
  double norm_estimate = 0.0;  // sqrt of the largest ring sup
  // Weight gap log omega(r) - log omega(M_phi(r)) on deep reference rings;
  // applicable only for u == 1 where the comparison theorem speaks.
  bool ratio_applicable = false;
  std::vector<double> ratio_radii;
  std::vector<double> ratio_gap;
  BoundVerdict ratio_verdict = BoundVerdict::Indeterminate;
  bool consistent = true;
};

BoundednessReport classify_boundedness(const KernelTable& t, const MultiplierSpec& u,
                                       const MapSpec& phi, const DiskQuadrature& q,
                                       const ClassifyOptions& opt = {});

struct CompactnessReport {
  CompactVerdict verdict = CompactVerdict::Indeterminate;
  RingSweep sweep;
  bool ratio_applicable = false;
  double ratio_gap_deepest = 0.0;
  CompactVerdict ratio_verdict = CompactVerdict::Indeterminate;
  AngularVerdict angular = AngularVerdict::Indeterminate;
  bool consistent = true;
};

CompactnessReport classify_compactness(const KernelTable& t, const MultiplierSpec& u,
                                       const MapSpec& phi, const DiskQuadrature& q,
                                       const BoundednessReport& bounded,
                                       const ClassifyOptions& opt = {});

struct EssentialNormBracket {
  double lower = 0.0;  // sqrt of the deepest-ring sup of B_phi
  double upper = 0.0;  // c_upper times lower
  std::vector<int> tail_cutoffs;
  std::vector<double> tail_norms;  // ||u C_phi R_n|| for each cutoff
  bool tail_consistent = true;     // final tail norm within ten percent of lower
};

EssentialNormBracket essential_norm_bracket(const KernelTable& t, const MultiplierSpec& u,
                                            const MapSpec& phi, const DiskQuadrature& q,
                                            const ClassifyOptions& opt = {});

// Truncated singular-value sums at orders n and 2n of the coefficient model.
struct SchattenResult {
  double p = 0.0;
  int n = 0;
  double value_n = 0.0;   // (sum sigma^p)^{1/p} over the n-column compression
  double value_2n = 0.0;  // same over 2n columns, the reported value
  double rel_change = 0.0;  // relative growth of the p-th power sums
  SpVerdict verdict = SpVerdict::Indeterminate;
};

SchattenResult schatten_norm(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                             double p, int n = 200);

// Partial integrals of B_phi(|u|^2)^{p/2} tau^{-2} over an exhausting ladder
// of disks; finiteness of the limit is the integral-side membership test.
struct CriterionPartials {
  double p = 0.0;
  std::vector<double> radii;
  std::vector<double> partials;
  SpVerdict verdict = SpVerdict::Indeterminate;
};

CriterionPartials schatten_criterion(const KernelTable& t, const MultiplierSpec& u,
                                     const MapSpec& phi, double p, const DiskQuadrature& q,
                                     const ClassifyOptions& opt = {});

// Partial integrals of the closed-form Hilbert-Schmidt density
// (omega / omega(phi)) (tau / tau(phi))^2 |u|^2 tau^{-2}; no kernel involved.
CriterionPartials hilbert_schmidt_test(const WeightSpec& w, const MultiplierSpec& u,
                                       const MapSpec& phi, const ClassifyOptions& opt = {});

struct SchattenEntry {
  SchattenResult norm;
  CriterionPartials criterion;
  bool agree = true;
};

struct ClassificationReport {
  BoundednessReport bounded;
  CompactnessReport compact;
  bool has_essential = false;
  EssentialNormBracket essential;
  std::vector<std::pair<double, SchattenEntry>> schatten;  // ascending in p
  CriterionPartials hilbert_schmidt;
  GlobalAngularReport angular;
  // max over the deepest ring of adjoint_kernel_norm / sup-ring B; finite and
  // order one for bounded operators, 0 when unbounded or untested.
  double problem_ratio = 0.0;
  bool lattice_consistent = true;  // S_p finite => compact => bounded
};

ClassificationReport classify_operator(const KernelTable& t, const MultiplierSpec& u,
                                       const MapSpec& phi, const DiskQuadrature& q,
                                       const std::vector<double>& schatten_ps,
                                       const ClassifyOptions& opt = {});

}  // namespace blab
