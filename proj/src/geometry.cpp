#include "blab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>

#include "blab/errors.hpp"
#include "blab/symbols.hpp"

namespace blab {

namespace {

constexpr double kFineStep = 0.04;  // radial step in units of tau, finest level
constexpr int kStride[3] = {8, 4, 1};

struct PolarGraph {
  std::vector<double> radii;
  std::vector<int> n_angles;
  std::vector<int> offset;  // vertex id of (ring, 0)
  int n_base = 0;           // vertices before injected endpoints
  std::vector<Point> extra;
  std::vector<std::vector<std::pair<int, double>>> adj;

  Point position(int v) const {
    if (v >= n_base) return extra[size_t(v) - size_t(n_base)];
    size_t ring = size_t(std::upper_bound(offset.begin(), offset.end(), v) - offset.begin()) - 1;
    int j = v - offset[ring];
    double theta = 2.0 * kPi * double(j) / double(n_angles[ring]);
    return std::polar(radii[ring], theta);
  }

  void add_edge(const WeightSpec& w, int a, int b) {
    Point pa = position(a), pb = position(b);
    double len = std::abs(pa - pb);
    if (len == 0.0) return;
    double rmax = std::max(std::abs(pa), std::abs(pb));
    double wt = len / eval_tau(w, std::min(rmax, 1.0 - 1e-12));
    adj[size_t(a)].push_back({b, wt});
    adj[size_t(b)].push_back({a, wt});
  }
};

// Ladder of rings with spacing kFineStep * tau, all levels sharing one vertex
// numbering; edges are accumulated from the coarsest requested level down, so
// refining can only shorten paths.
PolarGraph build_polar_graph(const WeightSpec& w, double r_max, int level,
                             const std::vector<Point>& endpoints) {
  PolarGraph g;
  double r = 0.0;
  while (true) {
    g.radii.push_back(r);
    int n = (r == 0.0) ? 1
                       : std::max(8, int(std::lround(2.0 * kPi * r / (kFineStep * eval_tau(w, r)))));
    g.n_angles.push_back(n);
    if (r > r_max && g.radii.size() >= 2) break;
    r += kFineStep * eval_tau(w, r);
    if (r >= 1.0 - 1e-7) break;
  }
  int rings = int(g.radii.size());
  g.offset.resize(rings);
  int id = 0;
  for (int i = 0; i < rings; ++i) {
    g.offset[i] = id;
    id += g.n_angles[i];
  }
  g.n_base = id;
  g.extra = endpoints;
  g.adj.resize(size_t(g.n_base) + endpoints.size());

  for (int lv = 0; lv <= level; ++lv) {
    int s = kStride[lv];
    for (int i = 0; i < rings; i += s) {
      int n = g.n_angles[i];
      // angular neighbors at this level's stride
      if (n > 1) {
        for (int j = 0; j < n; j += s) {
          int jn = (j + s < n) ? j + s : 0;
          if (jn != j) g.add_edge(w, g.offset[i] + j, g.offset[i] + jn);
        }
      }
      // edges to the next ring kept at this level
      int in = i + s;
      if (in >= rings) continue;
      int nn = g.n_angles[in];
      for (int j = 0; j < n; j += s) {
        double frac = double(j) / double(n);
        int base = int(std::lround(frac * nn / s)) * s;
        for (int d = -s; d <= s; d += s) {
          int jn = ((base + d) % nn + nn) % nn;
          if (jn % s != 0) continue;
          g.add_edge(w, g.offset[i] + j, g.offset[in] + jn);
        }
      }
    }
    // endpoint hookups per level, accumulated like the base edges
    for (size_t e = 0; e < endpoints.size(); ++e) {
      Point p = endpoints[e];
      double pr = std::abs(p);
      int ev = g.n_base + int(e);
      int below = 0;
      while (below + 1 < rings && g.radii[size_t(below) + 1] <= pr) ++below;
      for (int i = (below / s) * s; i <= std::min((below / s) * s + 2 * s, rings - 1); i += s) {
        int n = g.n_angles[i];
        double theta = std::arg(p);
        if (theta < 0) theta += 2.0 * kPi;
        int base = int(std::lround(theta / (2.0 * kPi) * double(n) / double(s))) * s;
        for (int d = -2 * s; d <= 2 * s; d += s) {
          int j = ((base + d) % n + n) % n;
          if (j % s != 0) continue;
          g.add_edge(w, ev, g.offset[i] + j);
        }
      }
    }
  }
  return g;
}

std::vector<double> dijkstra(const PolarGraph& g, int source) {
  std::vector<double> dist(g.adj.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[size_t(source)] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[size_t(v)]) continue;
    for (auto [u, wgt] : g.adj[size_t(v)]) {
      double nd = d + wgt;
      if (nd < dist[size_t(u)]) {
        dist[size_t(u)] = nd;
        heap.push({nd, u});
      }
    }
  }
  return dist;
}

double segment_bound(const WeightSpec& w, Point z, Point xi) {
  const int kSplits = 256;
  double total = 0.0;
  Point prev = z;
  for (int i = 1; i <= kSplits; ++i) {
    Point cur = z + (xi - z) * (double(i) / kSplits);
    double rmax = std::max(std::abs(prev), std::abs(cur));
    total += std::abs(cur - prev) / eval_tau(w, std::min(rmax, 1.0 - 1e-12));
    prev = cur;
  }
  return total;
}

}  // namespace

double max_delta(const WeightSpec& w) { return measure_tau_constants(w).m_tau; }

AdaptedDisk adapted_disk(const WeightSpec& w, Point center, double delta) {
  if (!(std::abs(center) < 1.0)) throw DomainError("adapted disk center must be inside the disk");
  double m = max_delta(w);
  if (!(delta > 0.0) || !(delta < m)) {
    throw DomainError("adapted disk delta must lie in (0, m_tau)");
  }
  AdaptedDisk d;
  d.center = center;
  d.delta = delta;
  d.radius = delta * eval_tau(w, std::abs(center));
  if (std::abs(center) + d.radius >= 1.0) {
    throw ContractViolation("adapted disk leaves the unit disk");
  }
  return d;
}

ComparabilityBounds comparability_check(const WeightSpec& w, Point a, double delta, int samples) {
  if (samples < 9) throw DomainError("comparability check needs at least 9 samples");
  AdaptedDisk disk = adapted_disk(w, a, delta);
  double tau_a = eval_tau(w, std::abs(a));
  int rings = std::max(2, int(std::sqrt(double(samples) / 6.0)));
  int angles = std::max(6, samples / rings);
  angles += angles % 2;  // keep the antipodal pair of extreme radii on the sweep
  ComparabilityBounds out;
  out.min_ratio = 1.0;
  out.max_ratio = 1.0;
  for (int i = 1; i <= rings; ++i) {
    double rho = disk.radius * double(i) / double(rings);
    for (int j = 0; j < angles; ++j) {
      Point z = a + std::polar(rho, 2.0 * kPi * double(j) / double(angles));
      double ratio = eval_tau(w, std::abs(z)) / tau_a;
      out.min_ratio = std::min(out.min_ratio, ratio);
      out.max_ratio = std::max(out.max_ratio, ratio);
    }
  }
  out.within_half_two = out.min_ratio >= 0.5 && out.max_ratio <= 2.0;
  return out;
}

CoveringSequence build_covering(const WeightSpec& w, double delta, double epsilon, int grid_n) {
  double m = max_delta(w);
  if (!(delta > 0.0) || !(delta < m)) throw DomainError("covering delta must lie in (0, m_tau)");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw DomainError("covering epsilon must lie in (0, 1)");
  double r_cut = 1.0 - epsilon;
  if (grid_n == 0) {
    double pitch = delta * eval_tau(w, r_cut) / 4.0;
    double req = std::ceil(2.0 * r_cut / pitch) + 1.0;
    if (req > 1600.0) {
      throw ResolutionError("covering grid would need more than 1600 points per side");
    }
    grid_n = int(req);
  }
  if (grid_n < 16) throw DomainError("covering grid too small");

  CoveringSequence seq;
  seq.delta = delta;
  seq.epsilon = epsilon;
  seq.grid_n = grid_n;

  std::vector<Point> grid;
  grid.reserve(size_t(grid_n) * size_t(grid_n));
  double step = 2.0 * r_cut / double(grid_n - 1);
  for (int iy = 0; iy < grid_n; ++iy) {
    for (int ix = 0; ix < grid_n; ++ix) {
      Point z(-r_cut + step * ix, -r_cut + step * iy);
      if (std::abs(z) <= r_cut) grid.push_back(z);
    }
  }
  std::vector<size_t> order(grid.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    double na = std::norm(grid[a]), nb = std::norm(grid[b]);
    if (na != nb) return na < nb;
    if (grid[a].real() != grid[b].real()) return grid[a].real() < grid[b].real();
    return grid[a].imag() < grid[b].imag();
  });

  // Spatial hash with cell size = the largest possible disk radius, so any
  // covering disk center lies within one cell of the query point.
  double cell = std::max(delta * eval_tau(w, 0.0), 1e-6);
  int ncell = int(std::ceil(2.2 / cell));
  auto cell_of = [&](Point z, int radius_cells, auto&& fn) {
    int cx = int((z.real() + 1.1) / cell);
    int cy = int((z.imag() + 1.1) / cell);
    for (int dy = -radius_cells; dy <= radius_cells; ++dy) {
      for (int dx = -radius_cells; dx <= radius_cells; ++dx) {
        int x = cx + dx, y = cy + dy;
        if (x < 0 || y < 0 || x >= ncell || y >= ncell) continue;
        fn(size_t(y) * size_t(ncell) + size_t(x));
      }
    }
  };
  std::vector<std::vector<int>> bins(size_t(ncell) * size_t(ncell));
  std::vector<double> radii;  // delta * tau(a_k)

  for (size_t idx : order) {
    Point z = grid[idx];
    bool covered = false;
    cell_of(z, 1, [&](size_t b) {
      if (covered) return;
      for (int k : bins[b]) {
        if (std::abs(z - seq.points[size_t(k)]) < radii[size_t(k)]) {
          covered = true;
          return;
        }
      }
    });
    if (covered) continue;
    int k = int(seq.points.size());
    seq.points.push_back(z);
    radii.push_back(delta * eval_tau(w, std::abs(z)));
    int cx = int((z.real() + 1.1) / cell);
    int cy = int((z.imag() + 1.1) / cell);
    bins[size_t(cy) * size_t(ncell) + size_t(cx)].push_back(k);
  }

  // Independent certification passes over the same grid.
  for (size_t j = 0; j < seq.points.size(); ++j) {
    cell_of(seq.points[j], 1, [&](size_t b) {
      for (int k : bins[b]) {
        if (size_t(k) == j) continue;
        if (std::abs(seq.points[j] - seq.points[size_t(k)]) < radii[size_t(k)]) {
          ++seq.separation_violations;
        }
      }
    });
  }
  int max_count = 0;
  for (Point z : grid) {
    bool covered = false;
    int count = 0;
    cell_of(z, 3, [&](size_t b) {
      for (int k : bins[b]) {
        double dist = std::abs(z - seq.points[size_t(k)]);
        if (dist < radii[size_t(k)]) covered = true;
        if (dist < 3.0 * radii[size_t(k)]) ++count;
      }
    });
    if (!covered) ++seq.uncovered_points;
    max_count = std::max(max_count, count);
  }
  seq.multiplicity = max_count;
  return seq;
}

std::vector<BergmanDistance> bergman_distances(const WeightSpec& w, Point z,
                                               const std::vector<Point>& targets, int level) {
  if (level < 0 || level > 2) throw DomainError("bergman distance level must be 0, 1 or 2");
  if (!(std::abs(z) < 1.0 - 1e-6)) throw DomainError("bergman distance point too close to the boundary");
  double r_max = std::abs(z);
  for (Point t : targets) {
    if (!(std::abs(t) < 1.0 - 1e-6)) {
      throw DomainError("bergman distance point too close to the boundary");
    }
    r_max = std::max(r_max, std::abs(t));
  }
  std::vector<Point> endpoints;
  endpoints.push_back(z);
  endpoints.insert(endpoints.end(), targets.begin(), targets.end());
  PolarGraph g = build_polar_graph(w, r_max, level, endpoints);
  std::vector<double> dist = dijkstra(g, g.n_base);
  std::vector<BergmanDistance> out(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) {
    out[i].graph = (targets[i] == z) ? 0.0 : dist[size_t(g.n_base) + 1 + i];
    out[i].segment = segment_bound(w, z, targets[i]);
  }
  return out;
}

BergmanDistance bergman_distance(const WeightSpec& w, Point z, Point xi, int level) {
  // canonical pair order makes the two argument orders run identically,
  // so the symmetry beta(z,xi) == beta(xi,z) is exact
  bool swap = (xi.real() < z.real()) || (xi.real() == z.real() && xi.imag() < z.imag());
  if (swap) std::swap(z, xi);
  return bergman_distances(w, z, {xi}, level)[0];
}

JuliaReport julia_containment(const MapSpec& phi, Point zeta, double d,
                              const std::vector<double>& k_values, int samples) {
  if (std::abs(std::abs(zeta) - 1.0) > 1e-9) throw DomainError("zeta must be a boundary point");
  if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("julia check needs a finite positive d");
  Point probe = phi.eval(zeta * (1.0 - 1e-9));
  if (1.0 - std::abs(probe) > 1e-5) {
    throw DomainError("no Julia point: the radial limit stays inside the disk");
  }
  JuliaReport rep;
  rep.eta = probe / std::abs(probe);
  int rings = std::max(3, int(std::sqrt(double(samples) / 8.0)));
  int angles = std::max(8, samples / rings);
  for (double k : k_values) {
    if (!(k > 0.0)) throw DomainError("horodisk parameter must be positive");
    Horodisk h{zeta, k};
    Point c = h.center();
    double rad = h.radius();
    for (int i = 1; i <= rings; ++i) {
      double rho = rad * (0.95 * double(i) / double(rings));
      for (int j = 0; j < angles; ++j) {
        Point zz = c + std::polar(rho, 2.0 * kPi * double(j) / double(angles));
        if (std::abs(zz) >= 1.0 - 1e-7) continue;
        if (std::abs(zeta - zz) < 1e-7) continue;
        Point fz = phi.eval(zz);
        double lhs = std::norm(rep.eta - fz) / (1.0 - std::norm(fz));
        double rhs = d * std::norm(zeta - zz) / (1.0 - std::norm(zz));
        rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
        ++rep.samples_used;
      }
    }
  }
  rep.holds = rep.max_ratio <= 1.0 + 1e-6;
  return rep;
}

bool nontangential_region(Point zeta, double alpha, Point z) {
  if (!(alpha > 1.0)) throw DomainError("nontangential opening must exceed 1");
  if (std::abs(std::abs(zeta) - 1.0) > 1e-9) throw DomainError("zeta must be a boundary point");
  return std::abs(z - zeta) < alpha * (1.0 - std::abs(z));
}

}  // namespace blab
