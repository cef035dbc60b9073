#include "blab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blab/errors.hpp"
#include "blab/geometry.hpp"

namespace blab {
namespace {

using MatC = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecC = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1>;

// ---------------------------------------------------------------------------
// Taylor data for the symbols. Every admissible map has its singularities
// strictly outside the closed disk, so the coefficients decay geometrically
// and a relative floor fixes the effective length.

constexpr double kCoeffFloor = 1e-26;
constexpr std::size_t kSeriesCap = std::size_t(1) << 21;
constexpr std::size_t kModelEntryCap = 8'000'000;

using Series = std::vector<Point>;

double series_scale(const Series& s) {
  double m = 0.0;
  for (const Point& c : s) m = std::max(m, std::abs(c));
  return m;
}

void trim(Series& s) {
  if (s.empty()) s.push_back(Point(0.0, 0.0));
  const double floor = kCoeffFloor * series_scale(s);
  std::size_t n = s.size();
  while (n > 1 && std::abs(s[n - 1]) <= floor) --n;
  s.resize(n);
}

Series mul(const Series& a, const Series& b) {
  if (a.size() + b.size() > kSeriesCap) throw ConfigError("coefficient model grew past the cap");
  Series out(a.size() + b.size() - 1, Point(0.0, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == Point(0.0, 0.0)) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  trim(out);
  return out;
}

// Horner composition f(g(.)).
Series compose(const Series& f, const Series& g) {
  Series out{f.back()};
  for (std::size_t j = f.size() - 1; j-- > 0;) {
    out = mul(out, g);
    out[0] += f[j];
  }
  return out;
}

Series map_series(const MapSpec& phi) {
  switch (phi.kind) {
    case MapSpec::Kind::Polynomial: {
      Series s = phi.coeffs;
      trim(s);
      return s;
    }
    case MapSpec::Kind::Dilation:
      return Series{Point(0.0, 0.0), Point(phi.r, 0.0)};
    case MapSpec::Kind::HyperbolicAutomorphism: {
      // (z+a)/(1+az) = a + (1-a^2) sum_{m>=1} (-a)^{m-1} z^m
      Series s{Point(phi.a, 0.0)};
      const double lead = 1.0 - phi.a * phi.a;
      const double scale = std::max(std::abs(phi.a), lead);
      double pw = 1.0;
      while (std::abs(lead * pw) > kCoeffFloor * scale) {
        s.push_back(Point(lead * pw, 0.0));
        pw *= -phi.a;
      }
      return s;
    }
    case MapSpec::Kind::Moebius: {
      // (z-mu)/(1-conj(mu) z) = -mu + (1-|mu|^2) sum_{m>=1} conj(mu)^{m-1} z^m
      Series s{-phi.mu};
      const double lead = 1.0 - std::norm(phi.mu);
      const double scale = std::max(std::abs(phi.mu), lead);
      Point pw(1.0, 0.0);
      while (lead * std::abs(pw) > kCoeffFloor * scale) {
        s.push_back(lead * pw);
        pw *= std::conj(phi.mu);
      }
      return s;
    }
    case MapSpec::Kind::Composite: {
      Series s = map_series(phi.parts.front());
      for (std::size_t i = 1; i < phi.parts.size(); ++i) s = compose(map_series(phi.parts[i]), s);
      return s;
    }
  }
  throw DomainError("unknown map kind");
}

Series multiplier_series(const MultiplierSpec& u) {
  switch (u.kind) {
    case MultiplierSpec::Kind::One:
      return Series{Point(1.0, 0.0)};
    case MultiplierSpec::Kind::Polynomial: {
      Series s = u.coeffs;
      trim(s);
      return s;
    }
    case MultiplierSpec::Kind::KernelPower:
      throw ConfigError("kernel-power multipliers have no coefficient model");
  }
  throw DomainError("unknown multiplier kind");
}

// Column k holds the coefficients of u * phi^k scaled into the normalized
// basis. Entries are assembled through their log magnitude so that the norm
// ratio never overflows on the way in; dead entries underflow to exact zero.
DenseMatrix build_model(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                        long long n_cols) {
  if (n_cols < 1) throw ConfigError("the coefficient model needs at least one column");
  if (std::size_t(n_cols) > t.log_norms.size())
    throw TruncationError("model columns reach past the table", n_cols - 1);
  const Series us = multiplier_series(u);
  const Series ps = map_series(phi);
  std::vector<Series> cols;
  cols.reserve(std::size_t(n_cols));
  std::size_t rows = 0;
  Series cur = us;
  for (long long k = 0; k < n_cols; ++k) {
    if (k > 0) cur = mul(cur, ps);
    rows = std::max(rows, cur.size());
    cols.push_back(cur);
  }
  if (rows > t.log_norms.size())
    throw TruncationError("image degrees reach past the table", (long long)rows - 1);
  if (rows * std::size_t(n_cols) > kModelEntryCap)
    throw ConfigError("coefficient model would exceed the dense entry cap");
  DenseMatrix g;
  g.rows = rows;
  g.cols = std::size_t(n_cols);
  g.a.assign(rows * g.cols, Point(0.0, 0.0));
  for (std::size_t k = 0; k < g.cols; ++k) {
    const Series& c = cols[k];
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double ac = std::abs(c[j]);
      if (ac == 0.0) continue;
      const double lm = std::log(ac) + 0.5 * (t.log_norms[j] - t.log_norms[k]);
      g.a[j * g.cols + k] = std::polar(std::exp(lm), std::arg(c[j]));
    }
  }
  return g;
}

double log_abs2_multiplier(const KernelTable& t, const MultiplierSpec& u, Point z) {
  if (u.kind == MultiplierSpec::Kind::KernelPower) {
    const double lk = kernel_eval_log(t, z, u.w).log_abs;
    const double ld = kernel_log_diag(t, std::abs(u.w));
    return 2.0 * u.exponent * (lk - ld);
  }
  const double a2 = std::norm(u.eval(z));
  return a2 > 0.0 ? std::log(a2) : kNegInf;
}

// log of ||G v_z||^2 / K(z, z), the model value of B_phi(|u|^2)(z). The
// coefficient column of k_z is rescaled by its largest term before the
// matvec, then the scale is restored outside the norm.
double log_b_model(const KernelTable& t, const DenseMatrix& g, Point z) {
  const double r = std::abs(z);
  const double ld = kernel_log_diag(t, r);
  const double lr = r > 0.0 ? std::log(r) : kNegInf;
  const double ph = std::arg(z);
  std::vector<double> le(g.cols);
  double lstar = kNegInf;
  for (std::size_t k = 0; k < g.cols; ++k) {
    le[k] = (k == 0 ? 0.0 : double(k) * lr) - 0.5 * t.log_norms[k];
    lstar = std::max(lstar, le[k]);
  }
  VecC v(g.cols);
  for (std::size_t k = 0; k < g.cols; ++k) {
    v[k] = (le[k] == kNegInf) ? Point(0.0, 0.0)
                              : std::polar(std::exp(le[k] - lstar), -double(k) * ph);
  }
  Eigen::Map<const MatC> gm(g.a.data(), Eigen::Index(g.rows), Eigen::Index(g.cols));
  const VecC y = gm * v;
  const double s = y.squaredNorm();
  if (!(s > 0.0)) return kNegInf;
  return std::log(s) + 2.0 * lstar - ld;
}

// Exact angular reduction of B for u = cu z^du, phi = cp z^dp with dp >= 1
// (or cp = 0). A ring maps to a ring, so the angular mean of |K|^2 is the
// pair sum at the product radius and no discrete angles appear at all.
double log_b_fold(const KernelTable& t, const DiskQuadrature& q, Point cu, long long du, Point cp,
                  long long dp, double r) {
  const double acu = std::abs(cu);
  if (acu == 0.0) return kNegInf;
  const double ld = kernel_log_diag(t, r);
  const double acp = std::abs(cp);
  LogSum acc;
  for (std::size_t i = 0; i < q.radii.size(); ++i) {
    const double rho = q.radii[i];
    const double x = r * acp * std::pow(rho, double(dp));
    acc.add(std::log(q.ring_mass[i]) + 2.0 * std::log(acu) +
            2.0 * double(du) * std::log(rho) + eval_log_weight(t.weight, rho) +
            kernel_log_pair_l2(t, x));
  }
  return acc.log() - ld;
}

struct MonomialPair {
  bool radial = false;
  Point cu{0.0, 0.0};
  Point cp{0.0, 0.0};
  long long du = 0;
  long long dp = 0;
};

MonomialPair detect(const MultiplierSpec& u, const MapSpec& phi) {
  MonomialPair m;
  Point cu, cp;
  long long du = 0, dp = 0;
  if (!u.monomial_form(cu, du) || !phi.monomial_form(cp, dp)) return m;
  if (dp == 0 && std::abs(cp) != 0.0) return m;  // a nonzero constant map keeps its angle
  m.radial = true;
  m.cu = cu;
  m.cp = cp;
  m.du = du;
  m.dp = dp;
  return m;
}

// Rings are pulled inside the certified reach: the diagonal needs r^2 and the
// fold needs the deepest product radius within rho_cert.
std::vector<double> clamp_rings(const KernelTable& t, const DiskQuadrature& q,
                                const MonomialPair& m, const std::vector<double>& rings,
                                std::size_t min_count) {
  double cap = std::sqrt(t.rho_cert) - 1e-4;
  if (m.radial) {
    const double acp = std::abs(m.cp);
    if (acp > 0.0) {
      const double top = std::pow(q.radii.back(), double(m.dp));
      cap = std::min(cap, (t.rho_cert - 1e-4) / (acp * top));
    }
  }
  std::vector<double> out;
  for (double r : rings) {
    const double c = std::min(r, cap);
    if (!(c > 0.0)) continue;
    if (out.empty() || c > out.back() + 1e-9) out.push_back(c);
  }
  if (out.size() < min_count) throw ResolutionError("table reach leaves too few distinct rings");
  return out;
}

long long model_columns(const KernelTable& t, double deepest) {
  const double x = std::min(deepest * deepest, t.rho_cert);
  const long long cols = kernel_series_extent(t, x) + 32;
  return std::min<long long>(cols, (long long)t.log_norms.size());
}

RingSweep radial_ring_sweep(const KernelTable& t, const DiskQuadrature& q, const MonomialPair& m,
                            const std::vector<double>& rings) {
  RingSweep s;
  s.radial = true;
  s.angles = 1;
  s.radii = rings;
  for (double r : rings) s.log_sup.push_back(log_b_fold(t, q, m.cu, m.du, m.cp, m.dp, r));
  return s;
}

RingSweep model_ring_sweep(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                           const std::vector<double>& rings, int angles) {
  RingSweep s;
  s.radial = false;
  s.angles = angles;
  s.radii = rings;
  const DenseMatrix g = build_model(t, u, phi, model_columns(t, rings.back()));
  for (double r : rings) {
    double best = kNegInf;
    for (int a = 0; a < angles; ++a) {
      best = std::max(best, log_b_model(t, g, std::polar(r, 2.0 * kPi * a / angles)));
    }
    s.log_sup.push_back(best);
  }
  return s;
}

BoundVerdict bound_verdict_from(const std::vector<double>& s) {
  bool all_dead = true, any_dead = false;
  for (double v : s) {
    if (v == kNegInf) any_dead = true;
    else all_dead = false;
  }
  if (all_dead) return BoundVerdict::Bounded;
  if (any_dead) return BoundVerdict::Indeterminate;
  double max_step = kNegInf;
  bool increasing = true;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double d = s[i] - s[i - 1];
    max_step = std::max(max_step, d);
    increasing = increasing && d > 0.0;
  }
  if (max_step < std::log(1.5)) return BoundVerdict::Bounded;
  if (increasing && s.back() - s.front() > std::log(10.0)) return BoundVerdict::Unbounded;
  return BoundVerdict::Indeterminate;
}

BoundVerdict ratio_bound_verdict(const std::vector<double>& g) {
  bool up = true;
  for (std::size_t i = 1; i < g.size(); ++i) up = up && g[i] > g[i - 1];
  if (up && g.back() - g.front() > std::log(10.0)) return BoundVerdict::Unbounded;
  if (g.back() < g.front() + std::log(1.5)) return BoundVerdict::Bounded;
  return BoundVerdict::Indeterminate;
}

CompactVerdict compact_verdict_from(const std::vector<double>& s) {
  bool all_dead = true;
  for (double v : s) all_dead = all_dead && v == kNegInf;
  if (all_dead) return CompactVerdict::Compact;
  bool down = true;
  for (std::size_t i = 1; i < s.size(); ++i) down = down && s[i] < s[i - 1];
  if (down && s.back() < std::log(1e-3)) return CompactVerdict::Compact;
  if (s.back() > std::log(1e-1)) return CompactVerdict::NotCompact;
  return CompactVerdict::Indeterminate;
}

CompactVerdict angular_compact(AngularVerdict v) {
  switch (v) {
    case AngularVerdict::AllAboveOne:
      return CompactVerdict::Compact;
    case AngularVerdict::SomeDerivativeBelowOne:
    case AngularVerdict::BoundaryCase:
      return CompactVerdict::NotCompact;
    case AngularVerdict::Indeterminate:
      break;
  }
  return CompactVerdict::Indeterminate;
}

SpVerdict partials_verdict(const std::vector<double>& p) {
  const std::size_t n = p.size();
  if (n < 3) return SpVerdict::Indeterminate;
  if (!std::isfinite(p[n - 1])) return SpVerdict::Infinite;
  if (p[n - 1] <= 0.0) return SpVerdict::Finite;
  const double rel = (p[n - 1] - p[n - 2]) / p[n - 1];
  if (rel < 1e-3) return SpVerdict::Finite;
  if (p[n - 2] > 0.0 && p[n - 3] > 0.0 && p[n - 1] > 2.0 * p[n - 2] && p[n - 2] > 2.0 * p[n - 3])
    return SpVerdict::Infinite;
  return SpVerdict::Indeterminate;
}

template <class F>
double band_integral(const F& f, double a, double b, int order) {
  std::vector<double> xs, ws;
  gauss_legendre(order, xs, ws);
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = 0.5 * (a + b) + 0.5 * (b - a) * xs[i];
    acc += ws[i] * f(r) * 2.0 * r;
  }
  return acc * 0.5 * (b - a);
}

template <class F>
std::vector<double> ladder_partials(const F& f, const std::vector<double>& ladder, int order) {
  std::vector<double> out;
  double acc = 0.0;
  double prev = 0.0;
  for (double top : ladder) {
    acc += band_integral(f, prev, top, order);
    out.push_back(acc);
    prev = top;
  }
  return out;
}

double tail_norm_from(const DenseMatrix& g, int n) {
  Eigen::Map<const MatC> gm(g.a.data(), Eigen::Index(g.rows), Eigen::Index(g.cols));
  const int m = int(g.cols) - n;
  const MatC b = gm.rightCols(m);
  const MatC mm = b.adjoint() * b;
  std::vector<Point> e(mm.data(), mm.data() + mm.size());
  const HermitianSpectrum s = hermitian_eigenvalues(e, m);
  const double top = s.eigenvalues.empty() ? 0.0 : std::max(0.0, s.eigenvalues.front());
  return std::sqrt(top);
}

void check_ladder(const std::vector<double>& v, const char* name) {
  if (v.size() < 2) throw ConfigError(std::string(name) + " needs at least two radii");
  double prev = 0.0;
  for (double r : v) {
    if (!(r > prev) || !(r < 1.0))
      throw ConfigError(std::string(name) + " must increase inside (0, 1)");
    prev = r;
  }
}

void validate_options(const ClassifyOptions& opt) {
  if (opt.ring_angles < 4) throw ConfigError("ring sweeps need at least four angles");
  if (opt.galerkin_dim < 41 || 2 * opt.galerkin_dim > 400)
    throw ConfigError("galerkin order must satisfy 40 < n and 2 n <= 400");
  if (!(opt.c_upper >= 1.0)) throw ConfigError("the bracket factor must be at least one");
  check_ladder(opt.radial_rings, "radial ring scheme");
  check_ladder(opt.model_rings, "model ring scheme");
  check_ladder(opt.radial_ladder, "radial ladder");
  check_ladder(opt.model_ladder, "model ladder");
}

// A probe ball is unresolved when some atom's sampling cell is coarser than
// the ball yet touches it: the discretization cannot distinguish the ball
// from its surroundings at that scale. Exact atoms have cell size zero and
// never trip this.
double averaging_log_impl(const WeightSpec& w, const DiscreteMeasure& mu,
                          const std::vector<std::size_t>& order,
                          const std::vector<double>& radii_sorted, double res_max, Point z,
                          double delta, bool* resolved = nullptr) {
  const double rad = delta * eval_tau(w, std::abs(z));
  const double r = std::abs(z);
  const auto lo = std::lower_bound(radii_sorted.begin(), radii_sorted.end(), r - rad - res_max);
  const auto hi = std::upper_bound(radii_sorted.begin(), radii_sorted.end(), r + rad + res_max);
  LogSum acc;
  bool fine = true;
  for (auto it = lo; it != hi; ++it) {
    const std::size_t i = order[std::size_t(it - radii_sorted.begin())];
    const double d = std::abs(mu.points[i] - z);
    if (!mu.resolution.empty() && mu.resolution[i] > rad && d < rad + mu.resolution[i]) {
      fine = false;
    }
    if (d < rad && mu.log_mass[i] != kNegInf) acc.add(mu.log_mass[i]);
  }
  if (resolved != nullptr) *resolved = fine;
  return acc.log() - 2.0 * std::log(rad);
}

}  // namespace

const char* to_string(BoundVerdict v) {
  switch (v) {
    case BoundVerdict::Bounded:
      return "bounded";
    case BoundVerdict::Unbounded:
      return "unbounded";
    case BoundVerdict::Indeterminate:
      break;
  }
  return "indeterminate";
}

const char* to_string(CompactVerdict v) {
  switch (v) {
    case CompactVerdict::Compact:
      return "compact";
    case CompactVerdict::NotCompact:
      return "not-compact";
    case CompactVerdict::Indeterminate:
      break;
  }
  return "indeterminate";
}

const char* to_string(SpVerdict v) {
  switch (v) {
    case SpVerdict::Finite:
      return "finite";
    case SpVerdict::Infinite:
      return "infinite";
    case SpVerdict::Indeterminate:
      break;
  }
  return "indeterminate";
}

namespace {

// Node spacing per ring: the larger of the radial gap to the neighbouring
// rings and the arc length between adjacent angular nodes.
std::vector<double> ring_spacing(const DiskQuadrature& q) {
  const std::size_t nr = q.radii.size();
  std::vector<double> s(nr);
  for (std::size_t j = 0; j < nr; ++j) {
    double gap = (j == 0) ? q.radii[0] : q.radii[j] - q.radii[j - 1];
    if (j + 1 < nr) gap = std::max(gap, q.radii[j + 1] - q.radii[j]);
    s[j] = std::max(gap, q.radii[j] * 2.0 * kPi / double(q.n_angular));
  }
  return s;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::area(const DiskQuadrature& q) {
  DiscreteMeasure mu;
  const std::size_t n = q.node_count();
  const std::vector<double> spacing = ring_spacing(q);
  mu.points.reserve(n);
  mu.log_mass.reserve(n);
  mu.resolution.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const QuadratureNode nd = q.node(i);
    mu.points.push_back(nd.point);
    mu.log_mass.push_back(std::log(nd.mass));
    mu.resolution.push_back(spacing[i / std::size_t(q.n_angular)]);
  }
  return mu;
}

DiscreteMeasure DiscreteMeasure::single_atom(Point z, double mass) {
  if (!(std::abs(z) < 1.0)) throw DomainError("atom must lie inside the open disk");
  if (!(mass > 0.0)) throw DomainError("atom mass must be positive");
  DiscreteMeasure mu;
  mu.points.push_back(z);
  mu.log_mass.push_back(std::log(mass));
  return mu;
}

DiscreteMeasure pullback_measure(const WeightSpec& w, const DiskQuadrature& q, const MapSpec& phi,
                                 const MultiplierSpec& u) {
  DiscreteMeasure mu;
  const std::size_t n = q.node_count();
  const std::vector<double> spacing = ring_spacing(q);
  mu.points.reserve(n);
  mu.log_mass.reserve(n);
  mu.resolution.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const QuadratureNode nd = q.node(i);
    const Point y = phi.eval(nd.point);
    const double u2 = std::norm(u.eval(nd.point));
    double lm = kNegInf;
    if (u2 > 0.0) {
      lm = std::log(nd.mass) + std::log(u2) + eval_log_weight(w, std::abs(nd.point)) -
           eval_log_weight(w, std::min(std::abs(y), 1.0 - 1e-15));
    }
    mu.points.push_back(y);
    mu.log_mass.push_back(lm);
    // The image cloud inherits the source spacing, stretched where the map
    // expands.
    const double stretch = std::max(1.0, std::abs(phi.derivative(nd.point)));
    mu.resolution.push_back(spacing[i / std::size_t(q.n_angular)] * stretch);
  }
  return mu;
}

double berezin_log(const KernelTable& t, const DiscreteMeasure& mu, Point z) {
  if (mu.size() == 0) throw DomainError("the measure has no atoms");
  const double ld = kernel_log_diag(t, std::abs(z));
  LogSum acc;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.log_mass[i] == kNegInf) continue;
    acc.add(mu.log_mass[i] + eval_log_weight(t.weight, std::abs(mu.points[i])) +
            2.0 * kernel_eval_log(t, z, mu.points[i]).log_abs - ld);
  }
  return acc.log();
}

double berezin(const KernelTable& t, const DiscreteMeasure& mu, Point z) {
  return std::exp(berezin_log(t, mu, z));
}

double berezin_area(const KernelTable& t, const DiskQuadrature& q, Point z) {
  const double r = std::abs(z);
  const double ld = kernel_log_diag(t, r);
  LogSum acc;
  for (std::size_t i = 0; i < q.radii.size(); ++i) {
    acc.add(std::log(q.ring_mass[i]) + eval_log_weight(t.weight, q.radii[i]) +
            kernel_log_pair_l2(t, r * q.radii[i]));
  }
  return std::exp(acc.log() - ld);
}

double averaging(const WeightSpec& w, const DiscreteMeasure& mu, Point z, double delta) {
  if (mu.size() == 0) throw DomainError("the measure has no atoms");
  if (!(std::abs(z) < 1.0)) throw DomainError("the center must lie inside the open disk");
  const TauConstants tc = measure_tau_constants(w);
  if (!(delta > 0.0) || !(delta < tc.m_tau)) throw DomainError("delta must lie in (0, m_tau)");
  const double rad = delta * eval_tau(w, std::abs(z));
  LogSum acc;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.log_mass[i] == kNegInf) continue;
    if (std::abs(mu.points[i] - z) < rad) acc.add(mu.log_mass[i]);
  }
  return std::exp(acc.log() - 2.0 * std::log(rad));
}

CarlesonReport carleson_diagnostics(const KernelTable& t, const DiscreteMeasure& mu,
                                    double delta) {
  const WeightSpec& w = t.weight;
  if (mu.size() == 0) throw DomainError("the measure has no atoms");
  const TauConstants tc = measure_tau_constants(w);
  if (!(delta > 0.0) || !(delta < tc.m_tau)) throw DomainError("delta must lie in (0, m_tau)");

  CarlesonReport rep;
  rep.delta = delta;

  double amax = 0.0;
  for (const Point& x : mu.points) amax = std::max(amax, std::abs(x));

  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(mu.points[a]) < std::abs(mu.points[b]);
  });
  std::vector<double> radii_sorted(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) radii_sorted[i] = std::abs(mu.points[order[i]]);
  double res_max = 0.0;
  for (double s : mu.resolution) res_max = std::max(res_max, s);

  // The berezin sup grid goes as deep as the table certificate allows for the
  // deepest atom; the averaging functional needs no kernel and its extra grid
  // is capped only by the weight.
  const double diag_cap = std::sqrt(t.rho_cert) - 1e-6;
  std::vector<double> tilde_radii;
  for (double r : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.85, 0.92, 0.96}) {
    if (r <= diag_cap && r * amax <= t.rho_cert - 1e-9) tilde_radii.push_back(r);
  }
  std::vector<double> hat_extra{0.8, 0.85, 0.9, 0.95, 0.99};

  const int na = 12;
  double sup_t = kNegInf, sup_h = kNegInf;
  double ratio = 0.0;
  bool ok = true;
  for (double r : tilde_radii) {
    for (int a = 0; a < na; ++a) {
      const Point z = std::polar(r, 2.0 * kPi * a / na);
      const double lh = averaging_log_impl(w, mu, order, radii_sorted, res_max, z, delta, &ok);
      if (!ok) {
        ++rep.unresolved_probes;
        continue;
      }
      const double lt = berezin_log(t, mu, z);
      sup_t = std::max(sup_t, lt);
      sup_h = std::max(sup_h, lh);
      if (lt != kNegInf && lh != kNegInf) ratio = std::max(ratio, std::exp(lh - lt));
    }
  }
  for (double r : hat_extra) {
    for (int a = 0; a < na; ++a) {
      const Point z = std::polar(r, 2.0 * kPi * a / na);
      const double lh = averaging_log_impl(w, mu, order, radii_sorted, res_max, z, delta, &ok);
      if (!ok) {
        ++rep.unresolved_probes;
        continue;
      }
      sup_h = std::max(sup_h, lh);
    }
  }
  rep.grid_points = (tilde_radii.size() + hat_extra.size()) * std::size_t(na);

  // Representative atom sites catch concentration the grid misses.
  const std::size_t step = std::max<std::size_t>(1, mu.size() / 2000);
  for (std::size_t s = 0; s < mu.size(); s += step) {
    const std::size_t i = order[s];
    if (mu.log_mass[i] == kNegInf) continue;
    const double lh = averaging_log_impl(w, mu, order, radii_sorted, res_max, mu.points[i], delta, &ok);
    if (!ok) {
      ++rep.unresolved_probes;
      continue;
    }
    sup_h = std::max(sup_h, lh);
  }

  const CoveringSequence cover = build_covering(w, delta, 1e-2, 400);
  double sup_s = kNegInf;
  for (const Point& a : cover.points) {
    const double lh = averaging_log_impl(w, mu, order, radii_sorted, res_max, a, delta, &ok);
    if (!ok) {
      ++rep.unresolved_probes;
      continue;
    }
    sup_s = std::max(sup_s, lh);
  }

  rep.log_sup_berezin = sup_t;
  rep.log_sup_averaging = sup_h;
  rep.log_sup_sequence = sup_s;
  rep.ratio_constant = ratio;
  rep.sequence_points = cover.points.size();
  return rep;
}

double phi_berezin(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi, Point z,
                   const DiskQuadrature& q) {
  const WeightSpec& w = t.weight;
  const double ld = kernel_log_diag(t, std::abs(z));
  LogSum acc;
  const std::size_t n = q.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    const QuadratureNode nd = q.node(i);
    const double lu = log_abs2_multiplier(t, u, nd.point);
    if (lu == kNegInf) continue;
    const Point y = phi.eval(nd.point);
    acc.add(std::log(nd.mass) + lu + eval_log_weight(w, std::abs(nd.point)) +
            2.0 * kernel_eval_log(t, z, y).log_abs - ld);
  }
  return std::exp(acc.log());
}

double adjoint_kernel_norm(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                           Point z) {
  const double lu = log_abs2_multiplier(t, u, z);
  if (lu == kNegInf) return 0.0;
  const Point y = phi.eval(z);
  return std::exp(lu + kernel_log_diag(t, std::min(std::abs(y), 1.0 - 1e-15)) -
                  kernel_log_diag(t, std::abs(z)));
}

DenseMatrix galerkin_matrix(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                            int n_cols) {
  return build_model(t, u, phi, n_cols);
}

DenseMatrix toeplitz_matrix(const KernelTable& t, const DiscreteMeasure& mu, int n) {
  if (n < 1 || n > 400) throw ConfigError("toeplitz order must lie in [1, 400]");
  if (std::size_t(n) > t.log_norms.size())
    throw TruncationError("toeplitz order reaches past the table", n - 1);
  if (mu.size() == 0) throw DomainError("the measure has no atoms");
  MatC m = MatC::Zero(n, n);
  VecC tv(n);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double lm = mu.log_mass[i];
    if (lm == kNegInf) continue;
    const Point x = mu.points[i];
    const double ax = std::abs(x);
    const double lax = ax > 0.0 ? std::log(ax) : kNegInf;
    const double ph = std::arg(x);
    const double base = 0.5 * (lm + eval_log_weight(t.weight, ax));
    for (int j = 0; j < n; ++j) {
      const double le = (j == 0 ? 0.0 : double(j) * lax) - 0.5 * t.log_norms[std::size_t(j)] + base;
      tv[j] = (lax == kNegInf && j > 0) ? Point(0.0, 0.0)
                                        : std::polar(std::exp(le), double(j) * ph);
    }
    m.selfadjointView<Eigen::Lower>().rankUpdate(tv, 1.0);
  }
  const MatC full = MatC(m.selfadjointView<Eigen::Lower>());
  DenseMatrix out;
  out.rows = std::size_t(n);
  out.cols = std::size_t(n);
  out.a.assign(full.data(), full.data() + full.size());
  return out;
}

double tail_projection_norm(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                            int n, int n_total) {
  if (n < 0 || n >= n_total || n_total > 400)
    throw ConfigError("tail range must satisfy 0 <= n < n_total <= 400");
  const DenseMatrix g = build_model(t, u, phi, n_total);
  return tail_norm_from(g, n);
}

BoundednessReport classify_boundedness(const KernelTable& t, const MultiplierSpec& u,
                                       const MapSpec& phi, const DiskQuadrature& q,
                                       const ClassifyOptions& opt) {
  validate_options(opt);
  const MonomialPair m = detect(u, phi);
  const std::vector<double> rings =
      clamp_rings(t, q, m, m.radial ? opt.radial_rings : opt.model_rings, 2);
  BoundednessReport rep;
  rep.sweep = m.radial ? radial_ring_sweep(t, q, m, rings)
                       : model_ring_sweep(t, u, phi, rings, opt.ring_angles);
  rep.verdict = bound_verdict_from(rep.sweep.log_sup);
  double smax = kNegInf;
  for (double s : rep.sweep.log_sup) smax = std::max(smax, s);
  rep.norm_estimate = smax == kNegInf ? 0.0 : std::exp(0.5 * smax);
  if (u.is_one()) {
    rep.ratio_applicable = true;
    rep.ratio_radii = boundary_rings();
    for (double r : rep.ratio_radii) {
      const double mx = std::min(radial_max(phi, r, 64).value, 1.0 - 1e-15);
      rep.ratio_gap.push_back(eval_log_weight(t.weight, r) - eval_log_weight(t.weight, mx));
    }
    rep.ratio_verdict = ratio_bound_verdict(rep.ratio_gap);
    rep.consistent = rep.ratio_verdict == rep.verdict;
  }
  return rep;
}

CompactnessReport classify_compactness(const KernelTable& t, const MultiplierSpec& u,
                                       const MapSpec& phi, const DiskQuadrature& q,
                                       const BoundednessReport& bounded,
                                       const ClassifyOptions& opt) {
  validate_options(opt);
  (void)q;
  CompactnessReport rep;
  rep.sweep = bounded.sweep;
  const GlobalAngularReport ang = global_angular_verdict(phi, 8);
  rep.angular = ang.verdict;
  if (bounded.verdict == BoundVerdict::Unbounded) {
    rep.verdict = CompactVerdict::NotCompact;
  } else if (bounded.verdict == BoundVerdict::Indeterminate) {
    rep.verdict = CompactVerdict::Indeterminate;
  } else {
    rep.verdict = compact_verdict_from(rep.sweep.log_sup);
  }
  if (u.is_one()) {
    rep.ratio_applicable = true;
    const double r = boundary_rings().back();
    const double mx = std::min(radial_max(phi, r, 64).value, 1.0 - 1e-15);
    rep.ratio_gap_deepest = eval_log_weight(t.weight, r) - eval_log_weight(t.weight, mx);
    if (rep.ratio_gap_deepest < std::log(1e-3)) rep.ratio_verdict = CompactVerdict::Compact;
    else if (rep.ratio_gap_deepest > std::log(1e-1)) rep.ratio_verdict = CompactVerdict::NotCompact;
    else rep.ratio_verdict = CompactVerdict::Indeterminate;
  }
  std::vector<CompactVerdict> vs{rep.verdict, angular_compact(ang.verdict)};
  if (rep.ratio_applicable) vs.push_back(rep.ratio_verdict);
  CompactVerdict ref = CompactVerdict::Indeterminate;
  bool ok = true;
  for (CompactVerdict v : vs) {
    if (v == CompactVerdict::Indeterminate) continue;
    if (ref == CompactVerdict::Indeterminate) ref = v;
    else if (v != ref) ok = false;
  }
  rep.consistent = ok;
  return rep;
}

EssentialNormBracket essential_norm_bracket(const KernelTable& t, const MultiplierSpec& u,
                                            const MapSpec& phi, const DiskQuadrature& q,
                                            const ClassifyOptions& opt) {
  validate_options(opt);
  const MonomialPair m = detect(u, phi);
  const std::vector<double> rings =
      clamp_rings(t, q, m, m.radial ? opt.radial_rings : opt.model_rings, 2);
  const RingSweep sweep = m.radial ? radial_ring_sweep(t, q, m, rings)
                                   : model_ring_sweep(t, u, phi, rings, opt.ring_angles);
  EssentialNormBracket out;
  const double deepest = sweep.log_sup.back();
  out.lower = deepest == kNegInf ? 0.0 : std::exp(0.5 * deepest);
  out.upper = opt.c_upper * out.lower;
  out.tail_cutoffs = {10, 20, 40};
  const DenseMatrix g = build_model(t, u, phi, opt.galerkin_dim);
  for (int c : out.tail_cutoffs) out.tail_norms.push_back(tail_norm_from(g, c));
  out.tail_consistent = out.tail_norms.back() + 1e-12 >= 0.9 * out.lower;
  return out;
}

SchattenResult schatten_norm(const KernelTable& t, const MultiplierSpec& u, const MapSpec& phi,
                             double p, int n) {
  if (!(p > 0.0)) throw DomainError("p must be positive");
  if (n < 4 || 2 * n > 400) throw ConfigError("order must satisfy 4 <= n and 2 n <= 400");
  SchattenResult out;
  out.p = p;
  out.n = n;
  const DenseMatrix g = build_model(t, u, phi, 2 * n);
  Eigen::Map<const MatC> gm(g.a.data(), Eigen::Index(g.rows), Eigen::Index(g.cols));
  const MatC m = gm.adjoint() * gm;
  std::vector<Point> full(m.data(), m.data() + m.size());
  const HermitianSpectrum s2 = hermitian_eigenvalues(full, 2 * n);
  std::vector<Point> half;
  half.reserve(std::size_t(n) * std::size_t(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) half.push_back(m(j, k));
  const HermitianSpectrum s1 = hermitian_eigenvalues(half, n);
  const double h = 0.5 * p;
  double sum1 = 0.0, sum2 = 0.0;
  for (double l : s1.eigenvalues)
    if (l > 0.0) sum1 += std::pow(l, h);
  for (double l : s2.eigenvalues)
    if (l > 0.0) sum2 += std::pow(l, h);
  out.value_n = sum1 > 0.0 ? std::pow(sum1, 1.0 / p) : 0.0;
  out.value_2n = sum2 > 0.0 ? std::pow(sum2, 1.0 / p) : 0.0;
  out.rel_change = sum2 > 0.0 ? std::max(0.0, (sum2 - sum1) / sum2) : 0.0;
  if (sum2 == 0.0 || out.rel_change < 1e-3) out.verdict = SpVerdict::Finite;
  else if (sum2 > 1.5 * sum1) out.verdict = SpVerdict::Infinite;
  else out.verdict = SpVerdict::Indeterminate;
  return out;
}

CriterionPartials schatten_criterion(const KernelTable& t, const MultiplierSpec& u,
                                     const MapSpec& phi, double p, const DiskQuadrature& q,
                                     const ClassifyOptions& opt) {
  if (!(p > 0.0)) throw DomainError("p must be positive");
  validate_options(opt);
  const MonomialPair m = detect(u, phi);
  const WeightSpec& w = t.weight;
  CriterionPartials out;
  out.p = p;
  if (m.radial) {
    out.radii = clamp_rings(t, q, m, opt.radial_ladder, 3);
    auto f = [&](double r) {
      const double lb = log_b_fold(t, q, m.cu, m.du, m.cp, m.dp, r);
      if (lb == kNegInf) return 0.0;
      return std::exp(0.5 * p * lb - 2.0 * std::log(eval_tau(w, r)));
    };
    out.partials = ladder_partials(f, out.radii, 12);
  } else {
    out.radii = clamp_rings(t, q, m, opt.model_ladder, 3);
    const DenseMatrix g = build_model(t, u, phi, model_columns(t, out.radii.back()));
    const int na = opt.ring_angles;
    auto f = [&](double r) {
      double acc = 0.0;
      for (int a = 0; a < na; ++a) {
        const double lb = log_b_model(t, g, std::polar(r, 2.0 * kPi * a / na));
        if (lb != kNegInf) acc += std::exp(0.5 * p * lb);
      }
      return acc / na * std::exp(-2.0 * std::log(eval_tau(w, r)));
    };
    out.partials = ladder_partials(f, out.radii, 6);
  }
  out.verdict = partials_verdict(out.partials);
  return out;
}

CriterionPartials hilbert_schmidt_test(const WeightSpec& w, const MultiplierSpec& u,
                                       const MapSpec& phi, const ClassifyOptions& opt) {
  validate_options(opt);
  CriterionPartials out;
  out.p = 2.0;
  out.radii = opt.radial_ladder;
  const int na = opt.ring_angles;
  auto f = [&](double r) {
    double acc = 0.0;
    for (int a = 0; a < na; ++a) {
      const Point z = std::polar(r, 2.0 * kPi * a / na);
      const double u2 = std::norm(u.eval(z));
      if (u2 == 0.0) continue;
      const double af = std::min(std::abs(phi.eval(z)), 1.0 - 1e-15);
      const double lf = std::log(u2) + eval_log_weight(w, r) - eval_log_weight(w, af) -
                        2.0 * std::log(eval_tau(w, af));
      acc += std::exp(lf);
    }
    return acc / na;
  };
  out.partials = ladder_partials(f, out.radii, 12);
  out.verdict = partials_verdict(out.partials);
  return out;
}

ClassificationReport classify_operator(const KernelTable& t, const MultiplierSpec& u,
                                       const MapSpec& phi, const DiskQuadrature& q,
                                       const std::vector<double>& schatten_ps,
                                       const ClassifyOptions& opt) {
  validate_options(opt);
  ClassificationReport rep;
  rep.bounded = classify_boundedness(t, u, phi, q, opt);
  rep.compact = classify_compactness(t, u, phi, q, rep.bounded, opt);
  rep.has_essential = rep.bounded.verdict == BoundVerdict::Bounded;
  if (rep.has_essential) rep.essential = essential_norm_bracket(t, u, phi, q, opt);
  std::vector<double> ps = schatten_ps;
  std::sort(ps.begin(), ps.end());
  for (double p : ps) {
    SchattenEntry e;
    e.norm = schatten_norm(t, u, phi, p, opt.galerkin_dim);
    e.criterion = schatten_criterion(t, u, phi, p, q, opt);
    e.agree = e.norm.verdict == e.criterion.verdict;
    rep.schatten.emplace_back(p, e);
  }
  rep.hilbert_schmidt = hilbert_schmidt_test(t.weight, u, phi, opt);
  rep.angular = global_angular_verdict(phi, 8);
  if (rep.has_essential) {
    double smax = kNegInf;
    for (double s : rep.bounded.sweep.log_sup) smax = std::max(smax, s);
    if (smax != kNegInf) {
      const double r = rep.bounded.sweep.radii.back();
      const int na = rep.bounded.sweep.radial ? 1 : rep.bounded.sweep.angles;
      double best = 0.0;
      for (int a = 0; a < na; ++a) {
        try {
          best =
              std::max(best, adjoint_kernel_norm(t, u, phi, std::polar(r, 2.0 * kPi * a / na)));
        } catch (const TruncationError&) {
          // the image radius left the certified reach; skip the probe
        }
      }
      rep.problem_ratio = best / std::exp(smax);
    }
  }
  bool any_sp_finite = rep.hilbert_schmidt.verdict == SpVerdict::Finite;
  for (const auto& [p, e] : rep.schatten) {
    (void)p;
    if (e.norm.verdict == SpVerdict::Finite || e.criterion.verdict == SpVerdict::Finite)
      any_sp_finite = true;
  }
  bool ok = true;
  if (any_sp_finite && rep.compact.verdict == CompactVerdict::NotCompact) ok = false;
  if (rep.compact.verdict == CompactVerdict::Compact &&
      rep.bounded.verdict == BoundVerdict::Unbounded)
    ok = false;
  rep.lattice_consistent = ok;
  return rep;
}

}  // namespace blab
