/**
 * Cellular antenna network.
 *
 * Builds the Voronoi tessellation of the towers inside a bounding box and
 * derives each tower's coverage radius r_max as the distance to its
 * farthest cell vertex. The tessellation is computed in a planar local
 * projection about the bbox center; cells at the hull are clipped to the
 * bbox and r_max is additionally capped so boundary antennas do not end up
 * with unbounded reach.
 */

#ifndef CTMAP_CELL_NET_HPP
#define CTMAP_CELL_NET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctmap/geo.hpp"
#include "ctmap/graph.hpp"

namespace ctmap::cell_net {

using TowerIndex = uint32_t;
inline constexpr TowerIndex kInvalidTower = UINT32_MAX;

/// Tower location as read from the towers file, before the build.
struct TowerSite {
  std::string id;
  geo::LatLon pos;
};

struct CellTower {
  std::string id;
  geo::LatLon pos;
  double r_max = 0.0;  // km, distance to the farthest clipped-cell vertex
};

struct BuildOptions {
  // Hull cells stretch to the bbox; the cap keeps their r_max within the
  // plausible antenna reach (matches the mapper's default tau).
  double r_max_cap_km = 5.0;
};

class CellularNetwork {
 public:
  size_t tower_count() const { return towers_.size(); }
  const CellTower &tower(TowerIndex i) const { return towers_[i]; }
  std::optional<TowerIndex> find(std::string_view id) const;
  TowerIndex index_of(std::string_view id) const;  // throws on unknown id

  /// Voronoi cell vertices in lat/lon, counterclockwise in the local plane.
  const std::vector<geo::LatLon> &cell_polygon(TowerIndex i) const {
    return cells_[i];
  }

  const geo::BoundingBox &bbox() const { return bbox_; }

  /// Nearest tower to a point, ties by smaller id.
  TowerIndex nearest_tower(const geo::LatLon &p) const;

  /// Towers within radius_km sorted by (distance, id).
  std::vector<TowerIndex> towers_near(const geo::LatLon &p,
                                      double radius_km) const;

  /// Voronoi-adjacent tower pairs (cells sharing a boundary segment),
  /// each pair once with smaller id first, sorted.
  const std::vector<std::pair<TowerIndex, TowerIndex>> &adjacent_pairs()
      const {
    return adjacency_;
  }

  const std::vector<std::string> &warnings() const { return warnings_; }

  friend CellularNetwork build_network(const std::vector<TowerSite> &sites,
                                       const geo::BoundingBox &bbox,
                                       const BuildOptions &options);

 private:
  std::vector<CellTower> towers_;
  std::vector<std::vector<geo::LatLon>> cells_;
  std::vector<std::pair<TowerIndex, TowerIndex>> adjacency_;
  std::unordered_map<std::string, TowerIndex> index_;
  geo::BoundingBox bbox_;
  std::vector<std::string> warnings_;
};

/**
 * Computes the clipped Voronoi tessellation and per-tower r_max.
 * Requires at least 3 non-collinear towers, all strictly inside the bbox,
 * with distinct ids and positions; violations throw.
 */
CellularNetwork build_network(const std::vector<TowerSite> &sites,
                              const geo::BoundingBox &bbox,
                              const BuildOptions &options = {});

/**
 * Quantile of the distance distribution over Voronoi-adjacent tower pairs:
 * the smallest adjacent distance x_th with at least a q fraction of pairs
 * at or below it. q must be in (0, 1]; throws when no adjacent pairs exist.
 */
double neighbor_distance_quantile(const CellularNetwork &network, double q);

/// Towers whose position coincides with a graph node (within 1e-9 km);
/// allowed but reported, one warning line per collision.
std::vector<std::string> collision_warnings(const CellularNetwork &network,
                                            const graph::MultilayerGraph &g);

}  // namespace ctmap::cell_net

#endif  // CTMAP_CELL_NET_HPP
