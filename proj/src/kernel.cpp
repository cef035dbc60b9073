#include "blab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "json.hpp"

#include "blab/errors.hpp"
#include "blab/geometry.hpp"
#include "blab/numerics.hpp"

namespace blab {

namespace {

constexpr double kTailLog = 41.45;   // 18 decades between tail term and peak
constexpr double kWindowCut = 46.0;  // per-term window floor for evaluation
constexpr long long kBuildBudget = 8'000'000;

// L(k) = k log x - log(2 p_k) is strictly concave because the moment sequence
// is log-convex. Summation only needs the k-range where L is within `cut` of
// its peak; everything outside contributes less than exp(-cut) per term.
struct Window {
  long long lo = 0;
  long long hi = 0;
  double peak = 0.0;
};

Window find_window(const std::vector<double>& log2p, double lx, double cut) {
  const long long k_max = static_cast<long long>(log2p.size()) - 1;
  auto L = [&](long long k) { return double(k) * lx - log2p[size_t(k)]; };
  long long lo = 0, hi = k_max;
  while (hi - lo > 2) {
    long long m1 = lo + (hi - lo) / 3;
    long long m2 = hi - (hi - lo) / 3;
    if (L(m1) < L(m2)) {
      lo = m1 + 1;
    } else {
      hi = m2;
    }
  }
  long long peak_k = lo;
  double peak = L(lo);
  for (long long k = lo + 1; k <= hi; ++k) {
    if (L(k) > peak) {
      peak = L(k);
      peak_k = k;
    }
  }
  const double floor_val = peak - cut;
  Window win;
  win.peak = peak;
  if (L(0) >= floor_val) {
    win.lo = 0;
  } else {
    long long a = 0, b = peak_k;
    while (b - a > 1) {
      long long mid = a + (b - a) / 2;
      if (L(mid) < floor_val) {
        a = mid;
      } else {
        b = mid;
      }
    }
    win.lo = b;
  }
  if (L(k_max) >= floor_val) {
    win.hi = k_max;
  } else {
    long long a = peak_k, b = k_max;
    while (b - a > 1) {
      long long mid = a + (b - a) / 2;
      if (L(mid) >= floor_val) {
        a = mid;
      } else {
        b = mid;
      }
    }
    win.hi = a;
  }
  return win;
}

long long required_truncation(const KernelTable& t, double x) {
  if (x <= t.rho_cert) return t.k_max;
  double est;
  if (t.weight.kind == WeightKind::ExponentialType) {
    double grow = std::pow((1.0 - std::sqrt(t.rho_cert)) / (1.0 - std::sqrt(x)),
                           t.weight.alpha + 1.0);
    est = double(t.k_max) * grow;
  } else {
    double g = (t.weight.kind == WeightKind::TestStandard) ? t.weight.gamma : 0.0;
    est = (kWindowCut + 8.0 * (g + 2.0)) / -std::log(x) + 64.0;
  }
  if (!(est < 4e18)) return 4'000'000'000'000'000'000LL;
  return std::max<long long>(t.k_max + 1, llround(est));
}

LogComplex eval_log_core(const KernelTable& t, Point z, Point xi) {
  if (!(std::abs(z) < 1.0) || !(std::abs(xi) < 1.0)) {
    throw DomainError("kernel arguments must lie in the open unit disk");
  }
  const Point w = z * std::conj(xi);
  const double x = std::abs(w);
  if (!(x <= t.rho_cert)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "kernel table certified for |z*conj(xi)| <= %.6g, requested %.6g",
                  t.rho_cert, x);
    throw TruncationError(buf, required_truncation(t, x));
  }
  if (x == 0.0) return LogComplex{-t.log_norms[0], 0.0};
  const double lx = std::log(x);
  const Window win = find_window(t.log_norms, lx, kWindowCut);
  const double theta = std::arg(w);
  const Point step = std::polar(1.0, theta);
  Point rot = std::polar(1.0, theta * double(win.lo));
  Point s(0.0, 0.0);
  int since_renorm = 0;
  for (long long k = win.lo; k <= win.hi; ++k) {
    const double m = std::exp(double(k) * lx - t.log_norms[size_t(k)] - win.peak);
    s += m * rot;
    rot *= step;
    if (++since_renorm == 512) {
      rot /= std::abs(rot);
      since_renorm = 0;
    }
  }
  const double mag = std::abs(s);
  if (mag == 0.0) return LogComplex{kNegInf, 0.0};
  return LogComplex{win.peak + std::log(mag), std::arg(s)};
}

const char* kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::ExponentialType:
      return "exponential";
    case WeightKind::TestUnweighted:
      return "unweighted";
    case WeightKind::TestStandard:
      return "standard";
  }
  return "unknown";
}

double tail_margin(const std::vector<double>& log2p, double lx) {
  const long long k_max = static_cast<long long>(log2p.size()) - 1;
  double peak = kNegInf;
  for (long long k = 0; k <= k_max; ++k) {
    peak = std::max(peak, double(k) * lx - log2p[size_t(k)]);
  }
  return double(k_max) * lx - log2p[size_t(k_max)] - peak;
}

std::string cache_file_name(const WeightSpec& w, double rho) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "ktab_%s_%.17g_%.17g_%.17g_%.17g_%.17g.json",
                kind_name(w.kind), w.alpha, w.c, w.beta, w.gamma, rho);
  return buf;
}

bool spot_check(const KernelTable& t, const WeightSpec& w, double rho) {
  if (t.weight.kind != w.kind || t.weight.alpha != w.alpha || t.weight.c != w.c ||
      t.weight.beta != w.beta || t.weight.gamma != w.gamma || t.rho_cert != rho) {
    return false;
  }
  if (t.k_max < 64 || t.log_norms.size() != size_t(t.k_max) + 1) return false;
  for (long long k : {0LL, t.k_max / 2, t.k_max}) {
    const double ref = std::log(2.0) + log_radial_moment(w, k, 1e-10);
    if (std::abs(t.log_norms[size_t(k)] - ref) > 1e-7 * (1.0 + std::abs(ref))) return false;
  }
  for (size_t k = 0; k + 1 < t.log_norms.size(); ++k) {
    if (!(t.log_norms[k + 1] < t.log_norms[k])) return false;
  }
  return tail_margin(t.log_norms, std::log(rho)) < -40.0;
}

KernelTable load_or_build(const WeightSpec& w, double rho) {
  const char* dir = std::getenv("BLAB_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return build_kernel_table(w, rho);
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path path = fs::path(dir) / cache_file_name(w, rho);
  if (fs::exists(path, ec)) {
    try {
      KernelTable t = import_kernel_table(path.string());
      if (spot_check(t, w, rho)) return t;
    } catch (const std::exception&) {
    }
  }
  KernelTable t = build_kernel_table(w, rho);
  try {
    fs::create_directories(fs::path(dir), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    export_kernel_table(t, tmp.string());
    fs::rename(tmp, path, ec);
  } catch (const std::exception&) {
    // cache writes are best effort; the freshly built table is still returned
  }
  return t;
}

}  // namespace

KernelTable build_kernel_table(const WeightSpec& w, double rho_cert, long long min_k_max) {
  if (!(rho_cert > 0.0) || !(rho_cert < 1.0)) {
    throw DomainError("rho_cert must lie in (0, 1)");
  }
  const double lx = std::log(rho_cert);
  long long guess = 64;
  if (w.kind == WeightKind::ExponentialType) {
    const double ts = 1.0 - std::sqrt(rho_cert);
    const double two_k = w.alpha * w.c / std::pow(ts, w.alpha + 1.0);
    const double lpp = 4.0 * ts / ((w.alpha + 1.0) * (two_k + 1.0) * (1.0 - ts));
    const double width = std::sqrt(2.0 * kWindowCut / lpp);
    guess = static_cast<long long>(0.5 * std::max(0.0, two_k - 1.0) + 1.3 * width) + 256;
  } else {
    const double g = (w.kind == WeightKind::TestStandard) ? w.gamma : 0.0;
    guess = static_cast<long long>((kWindowCut + 8.0 * (g + 2.0)) / -lx) + 64;
  }
  guess = std::max({guess, min_k_max, static_cast<long long>(64)});
  if (guess > kBuildBudget) {
    throw ResolutionError("kernel table would exceed the truncation budget; reduce rho_cert");
  }
  std::vector<double> log2p = log_norms_batch(w, guess);
  while (tail_margin(log2p, lx) > -kTailLog) {
    const long long next = guess + guess / 4 + 1024;
    if (next > kBuildBudget) {
      throw ResolutionError("kernel tail does not certify within the truncation budget");
    }
    extend_log_norms_batch(w, log2p, next);
    guess = next;
  }
  for (size_t k = 0; k + 1 < log2p.size(); ++k) {
    if (!(log2p[k + 1] < log2p[k])) {
      throw ContractViolation("moment sequence is not strictly decreasing");
    }
  }
  LogSum diag;
  for (size_t k = 0; k < log2p.size(); ++k) {
    diag.add(double(k) * lx - log2p[k]);
  }
  KernelTable t;
  t.weight = w;
  t.k_max = static_cast<long long>(log2p.size()) - 1;
  t.rho_cert = rho_cert;
  t.r_eval = std::sqrt(rho_cert);
  t.tail_ratio = std::exp(double(t.k_max) * lx - log2p.back() - diag.log());
  t.log_norms = std::move(log2p);
  return t;
}

double default_rho_cert(const WeightSpec& w) {
  switch (w.kind) {
    case WeightKind::TestUnweighted:
      return 0.84;
    case WeightKind::TestStandard:
      return 0.982;
    case WeightKind::ExponentialType:
      break;
  }
  // Radius chosen so the truncation order stays near 1.4e6; the resulting
  // r_eval still clears every ring protocol used by the diagnostics.
  double t_budget = std::pow(w.alpha * w.c / 2.5e6, 1.0 / (w.alpha + 1.0));
  t_budget = std::min(t_budget, 0.9);
  return std::min(0.9923, sq(1.0 - t_budget));
}

const KernelTable& shared_kernel_table(const WeightSpec& w, double rho_cert) {
  using TableKey = std::tuple<int, double, double, double, double, double>;
  static std::mutex mu;
  static std::map<TableKey, std::unique_ptr<KernelTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  const TableKey key{int(w.kind), w.alpha, w.c, w.beta, w.gamma, rho_cert};
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto t = std::make_unique<KernelTable>(load_or_build(w, rho_cert));
    it = cache.emplace(key, std::move(t)).first;
  }
  return *it->second;
}

const KernelTable& shared_kernel_table(const WeightSpec& w) {
  return shared_kernel_table(w, default_rho_cert(w));
}

void export_kernel_table(const KernelTable& t, const std::string& path) {
  nlohmann::json j;
  j["schema"] = "blab-kernel-table-v1";
  j["kind"] = kind_name(t.weight.kind);
  j["alpha"] = t.weight.alpha;
  j["c"] = t.weight.c;
  j["beta"] = t.weight.beta;
  j["gamma"] = t.weight.gamma;
  j["rho_cert"] = t.rho_cert;
  j["k_max"] = t.k_max;
  j["tail_ratio"] = t.tail_ratio;
  j["log2p"] = t.log_norms;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open kernel table for writing: " + path);
  out << j.dump();
  out.close();
  if (!out.good()) throw ConfigError("failed writing kernel table: " + path);
}

KernelTable import_kernel_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel table: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("schema", std::string()) != "blab-kernel-table-v1") {
    throw ConfigError("unknown kernel table schema in " + path);
  }
  const std::string kind = j.at("kind").get<std::string>();
  WeightSpec w;
  if (kind == "exponential") {
    w = WeightSpec::exponential(j.at("alpha").get<double>(), j.at("c").get<double>(),
                                j.at("beta").get<double>());
  } else if (kind == "unweighted") {
    w = WeightSpec::unweighted();
  } else if (kind == "standard") {
    w = WeightSpec::standard(j.at("gamma").get<double>());
  } else {
    throw ConfigError("unknown weight kind in " + path);
  }
  KernelTable t;
  t.weight = w;
  t.rho_cert = j.at("rho_cert").get<double>();
  t.k_max = j.at("k_max").get<long long>();
  t.tail_ratio = j.at("tail_ratio").get<double>();
  t.log_norms = j.at("log2p").get<std::vector<double>>();
  if (!(t.rho_cert > 0.0) || !(t.rho_cert < 1.0) || t.k_max < 0 ||
      t.log_norms.size() != size_t(t.k_max) + 1) {
    throw ConfigError("inconsistent kernel table in " + path);
  }
  t.r_eval = std::sqrt(t.rho_cert);
  return t;
}

Point kernel_eval(const KernelTable& t, Point z, Point xi) {
  return eval_log_core(t, z, xi).value();
}

LogComplex kernel_eval_log(const KernelTable& t, Point z, Point xi) {
  return eval_log_core(t, z, xi);
}

double kernel_log_diag(const KernelTable& t, double r) {
  if (!(r >= 0.0) || r >= 1.0) throw DomainError("radius must lie in [0, 1)");
  return eval_log_core(t, Point(r, 0.0), Point(r, 0.0)).log_abs;
}

double kernel_log_pair_l2(const KernelTable& t, double x) {
  if (!(x >= 0.0)) throw DomainError("product radius must be nonnegative");
  if (!(x <= t.rho_cert)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "kernel table certified for products <= %.6g, requested %.6g", t.rho_cert, x);
    throw TruncationError(buf, required_truncation(t, x));
  }
  if (x == 0.0) return -2.0 * t.log_norms[0];
  const double lx = std::log(x);
  const Window win = find_window(t.log_norms, lx, 0.5 * kWindowCut);
  double acc = 0.0;
  for (long long k = win.lo; k <= win.hi; ++k) {
    acc += std::exp(2.0 * (double(k) * lx - t.log_norms[size_t(k)] - win.peak));
  }
  return 2.0 * win.peak + std::log(acc);
}

long long kernel_series_extent(const KernelTable& t, double x) {
  if (!(x >= 0.0)) throw DomainError("product radius must be nonnegative");
  if (!(x <= t.rho_cert)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "kernel table certified for products <= %.6g, requested %.6g", t.rho_cert, x);
    throw TruncationError(buf, required_truncation(t, x));
  }
  if (x == 0.0) return 1;
  const Window win = find_window(t.log_norms, std::log(x), kTailLog);
  return win.hi + 1;
}

Point normalized_kernel(const KernelTable& t, Point z, Point xi) {
  return normalized_kernel_log(t, z, xi).value();
}

LogComplex normalized_kernel_log(const KernelTable& t, Point z, Point xi) {
  const LogComplex num = eval_log_core(t, xi, z);
  const double ld = kernel_log_diag(t, std::abs(z));
  return LogComplex{num.log_abs - 0.5 * ld, num.arg};
}

DiagonalEstimate check_diagonal_estimate(const KernelTable& t, const std::vector<double>& ring,
                                         double delta) {
  const WeightSpec& w = t.weight;
  const TauConstants tc = measure_tau_constants(w);
  if (!(delta > 0.0) || !(delta < 0.5 * tc.m_tau)) {
    throw DomainError("delta must lie in (0, m_tau/2)");
  }
  if (ring.empty()) throw DomainError("ring must contain at least one radius");
  DiagonalEstimate rep;
  rep.delta = delta;
  double ratio_lo = std::numeric_limits<double>::infinity();
  double ratio_hi = -ratio_lo;
  double diag_lo = ratio_lo;
  double diag_hi = -ratio_lo;
  for (double r : ring) {
    if (!(r >= 0.0) || r >= 1.0) throw DomainError("ring radii must lie in [0, 1)");
    const double ld_z = kernel_log_diag(t, r);
    const double dval =
        std::exp(ld_z + eval_log_weight(w, r) + 2.0 * std::log(eval_tau(w, r)));
    diag_lo = std::min(diag_lo, dval);
    diag_hi = std::max(diag_hi, dval);
    const double rad = delta * eval_tau(w, r);
    std::vector<Point> samples;
    samples.emplace_back(r, 0.0);
    for (double f : {0.25, 0.5, 0.75, 0.999999}) {
      for (int a = 0; a < 8; ++a) {
        samples.push_back(Point(r, 0.0) + std::polar(f * rad, 2.0 * kPi * a / 8.0));
      }
    }
    for (Point xi : samples) {
      const double lr =
          2.0 * eval_log_core(t, Point(r, 0.0), xi).log_abs - ld_z - kernel_log_diag(t, std::abs(xi));
      const double ratio = std::exp(lr);
      ratio_lo = std::min(ratio_lo, ratio);
      ratio_hi = std::max(ratio_hi, ratio);
    }
  }
  rep.ratio_min = ratio_lo;
  rep.ratio_max = ratio_hi;
  rep.diag_min = diag_lo;
  rep.diag_max = diag_hi;
  return rep;
}

OffDiagonalDecay check_offdiagonal_decay(const KernelTable& t,
                                         const std::vector<std::pair<Point, Point>>& pairs) {
  if (pairs.empty()) throw DomainError("need at least one point pair");
  const WeightSpec& w = t.weight;
  std::map<std::pair<double, double>, std::vector<size_t>> by_source;
  for (size_t i = 0; i < pairs.size(); ++i) {
    by_source[{pairs[i].first.real(), pairs[i].first.imag()}].push_back(i);
  }
  std::vector<double> xs(pairs.size(), 0.0), ys(pairs.size(), 0.0);
  std::vector<char> used(pairs.size(), 0);
  OffDiagonalDecay rep;
  for (const auto& [src_key, idx] : by_source) {
    const Point src(src_key.first, src_key.second);
    std::vector<Point> targets;
    targets.reserve(idx.size());
    for (size_t i : idx) targets.push_back(pairs[i].second);
    const std::vector<BergmanDistance> dist = bergman_distances(w, src, targets);
    for (size_t j = 0; j < idx.size(); ++j) {
      const size_t i = idx[j];
      const LogComplex lk = eval_log_core(t, pairs[i].first, pairs[i].second);
      if (lk.log_abs == kNegInf) {
        ++rep.pairs_skipped;
        continue;
      }
      const double az = std::abs(pairs[i].first);
      const double axi = std::abs(pairs[i].second);
      ys[i] = lk.log_abs + 0.5 * (eval_log_weight(w, az) + eval_log_weight(w, axi)) +
              std::log(eval_tau(w, az)) + std::log(eval_tau(w, axi));
      xs[i] = dist[j].graph;
      used[i] = 1;
      ++rep.pairs_used;
    }
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (!used[i] || !(xs[i] > 2.0)) continue;
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    ++n;
  }
  if (n < 2) {
    throw AccuracyError("need at least two usable pairs with graph distance above 2", double(n));
  }
  const double det = double(n) * sxx - sx * sx;
  if (!(det > 0.0)) {
    throw AccuracyError("graph distances are degenerate in the slope fit", det);
  }
  const double slope = (double(n) * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / double(n);
  rep.sigma = -slope;
  rep.pairs_fit = n;
  const double mean_y = sy / double(n);
  double ss_tot = 0.0, ss_res = 0.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (!used[i] || !(xs[i] > 2.0)) continue;
    ss_tot += sq(ys[i] - mean_y);
    ss_res += sq(ys[i] - (intercept + slope * xs[i]));
  }
  rep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  double env = kNegInf;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (used[i]) env = std::max(env, ys[i] + 0.5 * rep.sigma * xs[i]);
  }
  rep.envelope = env;
  return rep;
}

VanishingReport kernel_vanishing_on_compacts(const KernelTable& t, double compact_radius,
                                             const std::vector<Point>& z_sequence) {
  if (!(compact_radius > 0.0) || compact_radius > 0.5) {
    throw DomainError("compact_radius must lie in (0, 0.5]");
  }
  if (z_sequence.size() < 2) throw DomainError("need at least two sequence points");
  for (size_t i = 1; i < z_sequence.size(); ++i) {
    if (!(std::abs(z_sequence[i]) > std::abs(z_sequence[i - 1]))) {
      throw DomainError("|z_n| must be strictly increasing");
    }
  }
  std::vector<Point> grid;
  grid.emplace_back(0.0, 0.0);
  for (double f : {0.25, 0.5, 0.75, 1.0}) {
    for (int a = 0; a < 16; ++a) {
      grid.push_back(std::polar(f * compact_radius, 2.0 * kPi * a / 16.0));
    }
  }
  VanishingReport rep;
  rep.max_values.reserve(z_sequence.size());
  for (Point z : z_sequence) {
    const double ld = kernel_log_diag(t, std::abs(z));
    double best = kNegInf;
    for (Point xi : grid) {
      best = std::max(best, eval_log_core(t, xi, z).log_abs);
    }
    rep.max_values.push_back(std::exp(best - 0.5 * ld));
  }
  rep.decreasing = true;
  for (size_t i = 0; i + 1 < rep.max_values.size(); ++i) {
    if (std::abs(z_sequence[i]) >= 0.9 && !(rep.max_values[i + 1] < rep.max_values[i])) {
      rep.decreasing = false;
    }
  }
  rep.final_over_initial = rep.max_values.back() / rep.max_values.front();
  return rep;
}

}  // namespace blab
