#include "ctmap/cell_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctmap::cell_net {

namespace {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 sub(const geo::XY &a, const geo::XY &b) {
  return {a.x - b.x, a.y - b.y};
}
inline double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double dist2(const geo::XY &a, const geo::XY &b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Clips a convex polygon against the halfplane of points nearer to `keep`
// than to `cut`: { p : dot(p - mid, cut - keep) <= 0 }.
std::vector<geo::XY> clip_halfplane(const std::vector<geo::XY> &poly,
                                    const geo::XY &keep, const geo::XY &cut) {
  const geo::XY mid{0.5 * (keep.x + cut.x), 0.5 * (keep.y + cut.y)};
  const Vec2 n{cut.x - keep.x, cut.y - keep.y};
  std::vector<geo::XY> out;
  out.reserve(poly.size() + 1);
  const size_t m = poly.size();
  for (size_t i = 0; i < m; ++i) {
    const geo::XY &a = poly[i];
    const geo::XY &b = poly[(i + 1) % m];
    const double sa = dot(sub(a, mid), n);
    const double sb = dot(sub(b, mid), n);
    const bool in_a = sa <= 0.0, in_b = sb <= 0.0;
    if (in_a != in_b) {
      const double t = sa / (sa - sb);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    if (in_b) out.push_back(b);
  }
  return out;
}

double max_dist2_to_vertices(const geo::XY &p, const std::vector<geo::XY> &poly) {
  double best = 0.0;
  for (const geo::XY &v : poly) best = std::max(best, dist2(p, v));
  return best;
}

// Intersection of a convex polygon with the perpendicular bisector of
// (keep, cut); returns the segment length in km (0 when they only graze).
double bisector_section_km(const std::vector<geo::XY> &poly,
                           const geo::XY &keep, const geo::XY &cut,
                           geo::XY *midpoint) {
  const geo::XY mid{0.5 * (keep.x + cut.x), 0.5 * (keep.y + cut.y)};
  const Vec2 n{cut.x - keep.x, cut.y - keep.y};
  const double nn = std::sqrt(dot(n, n));
  if (nn == 0.0) return 0.0;
  const Vec2 t{-n.y / nn, n.x / nn};  // tangent along the bisector
  constexpr double kOnLine = 1e-9;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const size_t m = poly.size();
  for (size_t i = 0; i < m; ++i) {
    const geo::XY &a = poly[i];
    const geo::XY &b = poly[(i + 1) % m];
    const double sa = dot(sub(a, mid), n) / nn;
    const double sb = dot(sub(b, mid), n) / nn;
    auto take = [&](const geo::XY &p) {
      const double proj = dot(sub(p, mid), t);
      lo = std::min(lo, proj);
      hi = std::max(hi, proj);
    };
    if (std::abs(sa) <= kOnLine) take(a);
    if ((sa < -kOnLine && sb > kOnLine) || (sa > kOnLine && sb < -kOnLine)) {
      const double u = sa / (sa - sb);
      take({a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)});
    }
  }
  if (hi <= lo) return 0.0;
  if (midpoint) {
    const double c = 0.5 * (lo + hi);
    *midpoint = {mid.x + c * t.x, mid.y + c * t.y};
  }
  return hi - lo;
}

}  // namespace

std::optional<TowerIndex> CellularNetwork::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TowerIndex CellularNetwork::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw std::out_of_range("unknown tower id: " + std::string(id));
  }
  return it->second;
}

TowerIndex CellularNetwork::nearest_tower(const geo::LatLon &p) const {
  TowerIndex best = kInvalidTower;
  double best_d = std::numeric_limits<double>::infinity();
  for (TowerIndex i = 0; i < towers_.size(); ++i) {
    const double d = geo::distance_km(p, towers_[i].pos);
    if (d < best_d || (d == best_d && best != kInvalidTower &&
                       towers_[i].id < towers_[best].id)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::vector<TowerIndex> CellularNetwork::towers_near(const geo::LatLon &p,
                                                     double radius_km) const {
  std::vector<std::pair<double, TowerIndex>> hits;
  for (TowerIndex i = 0; i < towers_.size(); ++i) {
    const double d = geo::distance_km(p, towers_[i].pos);
    if (d <= radius_km) hits.emplace_back(d, i);
  }
  std::sort(hits.begin(), hits.end(), [this](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first < b.first;
    return towers_[a.second].id < towers_[b.second].id;
  });
  std::vector<TowerIndex> out;
  out.reserve(hits.size());
  for (const auto &[d, i] : hits) out.push_back(i);
  return out;
}

CellularNetwork build_network(const std::vector<TowerSite> &sites,
                              const geo::BoundingBox &bbox,
                              const BuildOptions &options) {
  if (sites.size() < 3) {
    throw std::invalid_argument("need at least 3 towers, got " +
                                std::to_string(sites.size()));
  }
  CellularNetwork net;
  net.bbox_ = bbox;
  for (const TowerSite &s : sites) {
    if (!geo::valid_coordinates(s.pos)) {
      throw std::invalid_argument("tower " + s.id + ": coordinates out of range");
    }
    if (!bbox.strictly_contains(s.pos)) {
      throw std::invalid_argument("tower " + s.id + " outside the bounding box");
    }
    auto [it, inserted] =
        net.index_.emplace(s.id, TowerIndex(net.towers_.size()));
    if (!inserted) throw std::invalid_argument("duplicate tower id: " + s.id);
    net.towers_.push_back(CellTower{s.id, s.pos, 0.0});
  }

  const geo::LocalProjection proj(bbox.center());
  const size_t n = net.towers_.size();
  std::vector<geo::XY> pts(n);
  for (size_t i = 0; i < n; ++i) pts[i] = proj.to_xy(net.towers_[i].pos);

  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (dist2(pts[i], pts[j]) < 1e-18) {
        throw std::invalid_argument("towers " + net.towers_[i].id + " and " +
                                    net.towers_[j].id + " coincide");
      }
    }
  }

  // Collinearity: perpendicular distance of every tower from the line
  // through the first two.
  {
    const Vec2 d = sub(pts[1], pts[0]);
    const double len = std::sqrt(d.x * d.x + d.y * d.y);
    bool collinear = true;
    for (size_t k = 2; k < n && collinear; ++k) {
      const Vec2 r = sub(pts[k], pts[0]);
      const double cross = d.x * r.y - d.y * r.x;
      if (std::abs(cross / len) > 1e-9) collinear = false;
    }
    if (collinear) throw std::invalid_argument("all towers are collinear");
  }

  const geo::XY lo = proj.to_xy({bbox.min_lat, bbox.min_lon});
  const geo::XY hi = proj.to_xy({bbox.max_lat, bbox.max_lon});
  const std::vector<geo::XY> box{
      {lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}};

  net.cells_.resize(n);
  std::vector<size_t> order;
  order.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<geo::XY> poly = box;
    order.clear();
    for (size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      const double da = dist2(pts[i], pts[a]), db = dist2(pts[i], pts[b]);
      if (da != db) return da < db;
      return net.towers_[a].id < net.towers_[b].id;
    });
    double reach2 = max_dist2_to_vertices(pts[i], poly);
    for (size_t j : order) {
      // The bisector of (i, j) sits at half their distance from tower i;
      // once that exceeds the polygon's reach no later tower can cut.
      if (0.25 * dist2(pts[i], pts[j]) >= reach2) break;
      poly = clip_halfplane(poly, pts[i], pts[j]);
      if (poly.size() < 3) {
        throw std::logic_error("degenerate Voronoi cell for tower " +
                               net.towers_[i].id);
      }
      reach2 = max_dist2_to_vertices(pts[i], poly);
    }

    double r_max = 0.0;
    std::vector<geo::LatLon> cell;
    cell.reserve(poly.size());
    for (const geo::XY &v : poly) {
      const geo::LatLon ll = proj.to_latlon(v);
      cell.push_back(ll);
      r_max = std::max(r_max, geo::distance_km(net.towers_[i].pos, ll));
    }
    if (r_max > options.r_max_cap_km) {
      net.warnings_.push_back("tower " + net.towers_[i].id +
                              ": r_max capped at " +
                              std::to_string(options.r_max_cap_km) + " km");
      r_max = options.r_max_cap_km;
    }
    net.towers_[i].r_max = r_max;
    net.cells_[i] = std::move(cell);
  }

  // Adjacency: cells i and j share a boundary segment iff the bisector of
  // (i, j) cuts a positive-length section out of cell i.
  std::vector<std::vector<geo::XY>> cell_xy(n);
  for (size_t i = 0; i < n; ++i) {
    cell_xy[i].reserve(net.cells_[i].size());
    for (const geo::LatLon &v : net.cells_[i]) cell_xy[i].push_back(proj.to_xy(v));
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      geo::XY mid{};
      if (bisector_section_km(cell_xy[i], pts[i], pts[j], &mid) < 1e-6) continue;
      // Guard against numerical slivers: the section's midpoint must have
      // no tower strictly closer than the pair that defines it.
      const double d2 = dist2(mid, pts[i]);
      bool genuine = true;
      for (size_t k = 0; k < n && genuine; ++k) {
        if (k == i || k == j) continue;
        if (dist2(mid, pts[k]) < d2 - 1e-9) genuine = false;
      }
      if (genuine) net.adjacency_.emplace_back(TowerIndex(i), TowerIndex(j));
    }
  }
  std::sort(net.adjacency_.begin(), net.adjacency_.end(),
            [&](const auto &a, const auto &b) {
              const auto ka =
                  std::tie(net.towers_[a.first].id, net.towers_[a.second].id);
              const auto kb =
                  std::tie(net.towers_[b.first].id, net.towers_[b.second].id);
              return ka < kb;
            });
  return net;
}

double neighbor_distance_quantile(const CellularNetwork &network, double q) {
  if (!(q > 0.0) || q > 1.0) {
    throw std::invalid_argument("quantile must be in (0, 1]");
  }
  const auto &pairs = network.adjacent_pairs();
  if (pairs.empty()) {
    throw std::runtime_error("no Voronoi-adjacent tower pairs");
  }
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto &[a, b] : pairs) {
    d.push_back(
        geo::distance_km(network.tower(a).pos, network.tower(b).pos));
  }
  std::sort(d.begin(), d.end());
  const size_t idx =
      std::min(d.size() - 1,
               size_t(std::max(0.0, std::ceil(q * double(d.size())) - 1.0)));
  return d[idx];
}

std::vector<std::string> collision_warnings(const CellularNetwork &network,
                                            const graph::MultilayerGraph &g) {
  std::vector<std::string> out;
  for (TowerIndex i = 0; i < network.tower_count(); ++i) {
    const CellTower &t = network.tower(i);
    for (graph::NodeIndex v = 0; v < g.node_count(); ++v) {
      if (geo::distance_km(t.pos, g.node(v).pos) <= 1e-9) {
        out.push_back("tower " + t.id + " coincides with node " +
                      g.node(v).id);
      }
    }
  }
  return out;
}

}  // namespace ctmap::cell_net
