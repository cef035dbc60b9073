#include "blab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <utility>

#include <Eigen/Dense>

#include "blab/errors.hpp"

namespace blab {

namespace {

using Rule = std::pair<std::vector<double>, std::vector<double>>;

const Rule& cached_rule(int n) {
  static std::map<int, Rule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Rule rule;
  rule.first.resize(n);
  rule.second.resize(n);
  // Newton on P_n with the asymptotic cosine seed; symmetric pairs.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.first[i] = -x;
    rule.second[i] = w;
    rule.first[n - 1 - i] = x;
    rule.second[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.first[n / 2] = 0.0;
  return cache.emplace(n, std::move(rule)).first->second;
}

// GL16 of exp(g(t) - gshift) over [a, b].
template <class G>
double gl16_exp(const G& g, double a, double b, double gshift) {
  const Rule& rule = cached_rule(16);
  double half = 0.5 * (b - a), mid = 0.5 * (a + b), sum = 0.0;
  for (int i = 0; i < 16; ++i) {
    double t = mid + half * rule.first[i];
    double e = g(t) - gshift;
    if (e > -700.0) sum += rule.second[i] * std::exp(e);
  }
  return sum * half;
}

// Recursive panel integration of exp(g - gshift). Panels are bisected while
// the sampled variation exceeds 12 in log scale, so each accepted piece is
// within easy reach of a 16-point rule.
template <class G>
double panel_rec(const G& g, double a, double b, double ga, double gb, double gshift, int depth) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double gm = g(m);
  double gmax = std::max(gm, std::max(ga, gb));
  if (gmax < gshift - 46.0) return 0.0;
  bool endpoints_wild = !std::isfinite(ga) || !std::isfinite(gb);
  bool steep = endpoints_wild || std::max(std::abs(ga - gm), std::abs(gm - gb)) > 12.0;
  if (!steep || depth >= 24) return gl16_exp(g, a, m, gshift) + gl16_exp(g, m, b, gshift);
  return panel_rec(g, a, m, ga, gm, gshift, depth + 1) +
         panel_rec(g, m, b, gm, gb, gshift, depth + 1);
}

struct PeakInfo {
  double t = 0.0;      // location of the maximum of g on (0, 1)
  double g_peak = 0.0;
  double sigma = 0.0;  // curvature scale 1/sqrt(-g'')
};

// g(t) = (2k+1) log(1-t) + log w(1-t) for the exponential family, with
// derivatives in closed form. Strictly concave with a unique interior peak.
struct ExpFamilyLog {
  double two_k_plus_1;
  double alpha, c, beta;

  double operator()(double t) const {
    double s = two_k_plus_1 * std::log1p(-t);
    if (beta != 0.0) s += beta * std::log(t);
    if (alpha == 1.0) return s - c / t;
    if (alpha == 2.0) return s - c / (t * t);
    return s - c * std::pow(t, -alpha);
  }
  double d1(double t) const {
    double s = -two_k_plus_1 / (1.0 - t);
    if (beta != 0.0) s += beta / t;
    if (alpha == 2.0) return s + 2.0 * c / (t * t * t);
    return s + alpha * c * std::pow(t, -alpha - 1.0);
  }
  double d2(double t) const {
    double u = 1.0 - t;
    double s = -two_k_plus_1 / (u * u);
    if (beta != 0.0) s -= beta / (t * t);
    return s - alpha * (alpha + 1.0) * c * std::pow(t, -alpha - 2.0);
  }
};

PeakInfo find_peak_exponential(const ExpFamilyLog& g, double warm_seed) {
  double t = warm_seed;
  if (!(t > 0.0) || !(t < 1.0)) {
    t = std::min(0.5, std::pow(g.alpha * g.c / g.two_k_plus_1, 1.0 / (g.alpha + 1.0)));
  }
  double lo = 0.0, hi = 1.0;  // open bracket; d1(lo+) > 0 > d1(hi-)
  for (int iter = 0; iter < 80; ++iter) {
    double h = g.d1(t);
    if (h > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    double step = h / g.d2(t);  // d2 < 0, so this moves toward the root
    double next = t - step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-13 * t) {
      t = next;
      break;
    }
    t = next;
  }
  PeakInfo peak;
  peak.t = t;
  peak.g_peak = g(t);
  double curv = -g.d2(t);
  peak.sigma = (curv > 0.0 && std::isfinite(curv)) ? 1.0 / std::sqrt(curv) : t / 8.0;
  peak.sigma = std::min(peak.sigma, 0.25);
  return peak;
}

// Ladder of panel edges around the peak, widths doubling outward, cut off
// once the edge value has dropped 46 below the peak.
template <class G>
std::vector<double> ladder_edges(const G& g, const PeakInfo& peak) {
  std::vector<double> down, up;
  double w = 2.0 * peak.sigma;
  double lo = peak.t - w;
  while (lo > 0.0 && g(lo) > peak.g_peak - 46.0) {
    down.push_back(lo);
    w *= 2.0;
    lo -= w;
  }
  down.push_back(std::max(lo, 0.0));
  w = 2.0 * peak.sigma;
  double hi = peak.t + w;
  while (hi < 1.0 && g(hi) > peak.g_peak - 46.0) {
    up.push_back(hi);
    w *= 2.0;
    hi += w;
  }
  up.push_back(std::min(hi, 1.0));

  std::vector<double> edges(down.rbegin(), down.rend());
  edges.push_back(peak.t);
  edges.insert(edges.end(), up.begin(), up.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

template <class G>
double integrate_ladder(const G& g, const PeakInfo& peak) {
  std::vector<double> edges = ladder_edges(g, peak);
  std::vector<double> gvals(edges.size());
  for (size_t i = 0; i < edges.size(); ++i) gvals[i] = g(edges[i]);
  double total = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    total += panel_rec(g, edges[i], edges[i + 1], gvals[i], gvals[i + 1], peak.g_peak, 0);
  }
  return total;
}

double log_norm_exponential(const WeightSpec& w, long long k, double warm_seed, double* t_out) {
  ExpFamilyLog g{2.0 * double(k) + 1.0, w.alpha, w.c, w.beta};
  PeakInfo peak = find_peak_exponential(g, warm_seed);
  if (t_out) *t_out = peak.t;
  double body = integrate_ladder(g, peak);
  return std::log(2.0) + peak.g_peak + std::log(body);
}

double log_norm_closed_form(const WeightSpec& w, long long k) {
  if (w.kind == WeightKind::TestUnweighted) {
    // 2 p_k = 1/(k+1)
    return -std::log(double(k) + 1.0);
  }
  // standard: p_k = B(2k+2, gamma+1)
  double a = 2.0 * double(k) + 2.0;
  return std::log(2.0) + std::lgamma(a) + std::lgamma(w.gamma + 1.0) - std::lgamma(a + w.gamma + 1.0);
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DomainError("gauss_legendre: order must be positive");
  const Rule& rule = cached_rule(n);
  nodes = rule.first;
  weights = rule.second;
}

QuadratureNode DiskQuadrature::node(size_t i) const {
  size_t ring = i / size_t(n_angular);
  size_t j = i % size_t(n_angular);
  double theta = 2.0 * kPi * double(j) / double(n_angular);
  return {std::polar(radii[ring], theta), ring_mass[ring] / double(n_angular)};
}

std::vector<QuadratureNode> DiskQuadrature::materialize() const {
  size_t total = node_count();
  if (total > size_t(1) << 24) throw ConfigError("DiskQuadrature: rule too large to materialize");
  std::vector<QuadratureNode> out;
  out.reserve(total);
  for (size_t i = 0; i < total; ++i) out.push_back(node(i));
  return out;
}

DiskQuadrature build_quadrature(int n_radial, int n_angular, double boundary_exponent) {
  if (n_radial < 16 || n_angular < 16) {
    throw ConfigError("build_quadrature: rule sizes must be at least 16");
  }
  if (!(boundary_exponent >= 1.0) || !std::isfinite(boundary_exponent)) {
    throw ConfigError("build_quadrature: boundary exponent must be a finite value >= 1");
  }
  int b = int(std::max<long long>(1, std::llround(boundary_exponent)));

  DiskQuadrature q;
  q.requested_radial = n_radial;
  q.n_angular = n_angular;
  q.boundary_exponent = b;
  // Monomial z^j conj(z)^k with j,k <= n_angular/2 - 1 has radial degree
  // b*(j+k+1) + b - 1 in s after the substitution, so raise the count until
  // the rule covers it.
  int needed = (b * n_angular + 1) / 2;
  q.n_radial = std::max(n_radial, needed);
  q.radial_rule = "gauss-legendre, r = 1-(1-s)^" + std::to_string(b);

  std::vector<double> x, wts;
  gauss_legendre(q.n_radial, x, wts);
  q.radii.resize(q.n_radial);
  q.ring_mass.resize(q.n_radial);
  for (int i = 0; i < q.n_radial; ++i) {
    double s = 0.5 * (x[i] + 1.0);
    double ws = 0.5 * wts[i];
    double one_minus = std::pow(1.0 - s, b);
    double r = 1.0 - one_minus;
    double jac = double(b) * ((b == 1) ? 1.0 : std::pow(1.0 - s, b - 1));
    q.radii[i] = r;
    q.ring_mass[i] = ws * jac * 2.0 * r;
  }
  return q;
}

double log_radial_moment(const WeightSpec& w, long long k, double tol) {
  if (k < 0) throw DomainError("radial_moment: k must be nonnegative");
  if (!(tol > 0.0)) throw DomainError("radial_moment: tol must be positive");

  auto g = [&](double t) { return (2.0 * double(k) + 1.0) * std::log1p(-t) + eval_log_weight_1m(w, t); };

  // Locate the peak with a coarse dyadic+uniform scan and a golden refine.
  double best_t = 0.5, best_g = g(0.5);
  for (int j = 1; j <= 60; ++j) {
    double t = std::ldexp(1.0, -j);
    double v = g(t);
    if (v > best_g) {
      best_g = v;
      best_t = t;
    }
  }
  for (int i = 1; i < 128; ++i) {
    double t = double(i) / 128.0;
    double v = g(t);
    if (v > best_g) {
      best_g = v;
      best_t = t;
    }
  }
  double lo = best_t * 0.5, hi = std::min(1.0 - 1e-16, best_t * 2.0);
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c1 = b - inv_phi * (b - a), c2 = a + inv_phi * (b - a);
  double f1 = g(c1), f2 = g(c2);
  for (int iter = 0; iter < 60; ++iter) {
    if (f1 < f2) {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + inv_phi * (b - a);
      f2 = g(c2);
    } else {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - inv_phi * (b - a);
      f1 = g(c1);
    }
  }
  double t_peak = 0.5 * (a + b);
  double g_peak = std::max(g(t_peak), best_g);
  if (g(t_peak) < best_g) t_peak = best_t;

  // Error-controlled bisection queue on paired 7/15-point estimates.
  struct Seg {
    double a, b, value, err;
  };
  auto eval_seg = [&](double sa, double sb) {
    const Rule& r15 = cached_rule(15);
    const Rule& r7 = cached_rule(7);
    double half = 0.5 * (sb - sa), mid = 0.5 * (sa + sb);
    double i15 = 0.0, i7 = 0.0;
    for (int i = 0; i < 15; ++i) {
      double e = g(mid + half * r15.first[i]) - g_peak;
      if (e > -700.0) i15 += r15.second[i] * std::exp(e);
    }
    for (int i = 0; i < 7; ++i) {
      double e = g(mid + half * r7.first[i]) - g_peak;
      if (e > -700.0) i7 += r7.second[i] * std::exp(e);
    }
    return Seg{sa, sb, i15 * half, std::abs(i15 - i7) * half};
  };

  auto worse = [](const Seg& s1, const Seg& s2) { return s1.err < s2.err; };
  std::priority_queue<Seg, std::vector<Seg>, decltype(worse)> queue(worse);
  double total = 0.0, err_total = 0.0;
  auto push_seg = [&](double sa, double sb) {
    Seg seg = eval_seg(sa, sb);
    total += seg.value;
    err_total += seg.err;
    queue.push(seg);
  };
  double edges[4] = {0.0, std::max(0.0, t_peak * 0.25), t_peak, 1.0};
  std::sort(edges, edges + 4);
  for (int i = 0; i + 1 < 4; ++i) {
    if (edges[i + 1] > edges[i]) push_seg(edges[i], edges[i + 1]);
  }

  for (int splits = 0; err_total > tol * std::abs(total) && splits < 2000; ++splits) {
    Seg top = queue.top();
    queue.pop();
    total -= top.value;
    err_total -= top.err;
    double mid = 0.5 * (top.a + top.b);
    push_seg(top.a, mid);
    push_seg(mid, top.b);
  }
  if (err_total > tol * std::abs(total)) {
    throw AccuracyError("radial_moment: tolerance not reached",
                        err_total / std::max(std::abs(total), 1e-300));
  }
  if (!(total > 0.0)) throw AccuracyError("radial_moment: integral evaluated to zero", 1.0);
  return g_peak + std::log(total);
}

double radial_moment(const WeightSpec& w, long long k, double tol) {
  return std::exp(log_radial_moment(w, k, tol));
}

std::vector<double> log_norms_batch(const WeightSpec& w, long long k_max) {
  std::vector<double> out;
  extend_log_norms_batch(w, out, k_max);
  return out;
}

void extend_log_norms_batch(const WeightSpec& w, std::vector<double>& log2p, long long new_k_max) {
  if (new_k_max < 0) throw DomainError("log_norms_batch: k_max must be nonnegative");
  long long start = (long long)log2p.size();
  if (new_k_max + 1 <= start) return;
  log2p.resize(size_t(new_k_max) + 1);

  if (w.kind != WeightKind::ExponentialType) {
    for (long long k = start; k <= new_k_max; ++k) log2p[size_t(k)] = log_norm_closed_form(w, k);
    return;
  }
  double warm = -1.0;
  for (long long k = start; k <= new_k_max; ++k) {
    log2p[size_t(k)] = log_norm_exponential(w, k, warm, &warm);
  }
}

HermitianSpectrum hermitian_eigenvalues(const std::vector<std::complex<double>>& entries, int n) {
  if (n <= 0 || n > 400) throw ConfigError("hermitian_eigenvalues: dimension must lie in [1, 400]");
  if (entries.size() != size_t(n) * size_t(n)) {
    throw ConfigError("hermitian_eigenvalues: entry count does not match dimension");
  }

  Eigen::MatrixXcd m(n, n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::complex<double> v = entries[size_t(i) * n + j];
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw ContractViolation("hermitian_eigenvalues: non-finite entry");
      }
      m(i, j) = v;
      scale = std::max(scale, std::abs(v));
    }
  }
  double asym = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
    }
  }
  if (asym > 1e-12 * std::max(scale, 1.0)) {
    throw ContractViolation("hermitian_eigenvalues: matrix is not Hermitian");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw AccuracyError("hermitian_eigenvalues: eigensolver did not converge", 1.0);
  }

  HermitianSpectrum spec;
  spec.dimension = n;
  spec.eigenvalues.resize(n);
  for (int i = 0; i < n; ++i) spec.eigenvalues[i] = solver.eigenvalues()(n - 1 - i);

  Eigen::MatrixXcd resid = m * solver.eigenvectors() - solver.eigenvectors() * solver.eigenvalues().asDiagonal();
  spec.residual = resid.colwise().norm().maxCoeff();
  return spec;
}

}  // namespace blab
