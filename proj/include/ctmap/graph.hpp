/**
 * Multilayer transportation graph.
 *
 * Nodes are road intersections or metro/train stations tagged with a layer;
 * undirected edges carry a class, a physical length and a travel-time weight
 * (hours per kilometer, the inverse of the class speed). Cross-layer edges
 * join nodes of different layers and model mode switches.
 *
 * The graph is mutable while it is being assembled and treated as immutable
 * afterwards; all queries are const and safe to run concurrently.
 */

#ifndef CTMAP_GRAPH_HPP
#define CTMAP_GRAPH_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctmap/geo.hpp"

namespace ctmap::graph {

enum class Layer : uint8_t { Road, Metro, Train };

enum class EdgeClass : uint8_t {
  Metro,
  RoadHighway,
  RoadPrincipal,
  RoadRegional,
  RoadLocal,
  Crosslayer,
  Train,
};

std::string layer_name(Layer layer);
Layer parse_layer(std::string_view name);
std::string edge_class_name(EdgeClass cls);
EdgeClass parse_edge_class(std::string_view name);

/// Travel-time weight of an edge class, in hours per kilometer.
double edge_class_weight(EdgeClass cls);

/// Layer pair an edge class is allowed to join, or Crosslayer for mixed pairs.
bool edge_class_matches_layers(EdgeClass cls, Layer a, Layer b);

using NodeIndex = uint32_t;
inline constexpr NodeIndex kInvalidNode = UINT32_MAX;

struct Node {
  std::string id;
  geo::LatLon pos;
  Layer layer = Layer::Road;
};

/// One direction of an undirected edge, stored in the adjacency list.
struct HalfEdge {
  NodeIndex to = kInvalidNode;
  EdgeClass cls = EdgeClass::RoadLocal;
  double length_km = 0.0;
  double weight = 0.0;  // hours per km
};

/// An undirected edge reported once, with src <= dst by node id.
struct EdgeRecord {
  NodeIndex src = kInvalidNode;
  NodeIndex dst = kInvalidNode;
  EdgeClass cls = EdgeClass::RoadLocal;
  double length_km = 0.0;
  double weight = 0.0;
};

struct ConnectLayersReport {
  size_t edges_added = 0;
  std::vector<std::string> unconnected_stations;
};

class MultilayerGraph {
 public:
  NodeIndex add_node(std::string id, geo::LatLon pos, Layer layer);

  /// Adds an undirected edge. Length defaults to the geodesic distance
  /// between the endpoints. Rejects self loops, duplicate edges and classes
  /// inconsistent with the endpoint layers.
  void add_edge(NodeIndex src, NodeIndex dst, EdgeClass cls,
                std::optional<double> length_km = std::nullopt);
  void add_edge(std::string_view src_id, std::string_view dst_id, EdgeClass cls,
                std::optional<double> length_km = std::nullopt);

  /// Same, but skips the class/layer consistency check. Used by the
  /// degree-preserving rewiring, whose output deliberately keeps a single
  /// edge class regardless of endpoint layers.
  void add_edge_unchecked(NodeIndex src, NodeIndex dst, EdgeClass cls,
                          double length_km);

  std::optional<NodeIndex> find(std::string_view id) const;
  NodeIndex index_of(std::string_view id) const;  // throws on unknown id
  const Node &node(NodeIndex i) const { return nodes_[i]; }
  size_t node_count() const { return nodes_.size(); }
  size_t edge_count() const { return edge_count_; }

  std::span<const HalfEdge> neighbors(NodeIndex i) const {
    return adjacency_[i];
  }
  bool has_edge(NodeIndex a, NodeIndex b) const;
  const HalfEdge *edge_between(NodeIndex a, NodeIndex b) const;

  size_t degree(NodeIndex i) const { return adjacency_[i].size(); }
  size_t degree(std::string_view id) const { return degree(index_of(id)); }

  /// All undirected edges, each once, src <= dst by id, sorted by (src, dst).
  std::vector<EdgeRecord> edges() const;

  /// Nodes of one layer plus the edges internal to it.
  MultilayerGraph layer_subgraph(Layer layer) const;

  std::vector<NodeIndex> nodes_of_layer(Layer layer) const;

  /// Nearest node to a point, ties by smaller id. Returns kInvalidNode on an
  /// empty graph.
  NodeIndex nearest_node(const geo::LatLon &point) const;

  /// All nodes within radius_km of a point, sorted by (distance, id).
  std::vector<NodeIndex> nodes_near(const geo::LatLon &point,
                                    double radius_km) const;

  bool connected() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<HalfEdge>> adjacency_;
  std::unordered_map<std::string, NodeIndex> index_;
  size_t edge_count_ = 0;
};

/**
 * Adds a cross-layer edge from every metro/train station to its nearest node
 * of each other layer within radius_km. Idempotent: existing edges are kept,
 * nothing is duplicated. Stations that reach no other-layer node within the
 * radius are listed in the report.
 */
ConnectLayersReport connect_layers(MultilayerGraph &graph, double radius_km);

/// Great-circle distance between two points (module-level alias so callers
/// of the graph API need not pull in geo directly).
double geodesic_distance(const geo::LatLon &a, const geo::LatLon &b);

struct LayerStats {
  size_t nodes = 0;
  size_t edges = 0;  // edges internal to the layer
  double mean_degree = 0.0;
  double mean_edge_length_km = 0.0;
};

/// Node/edge counts and means of one layer's internal subgraph.
LayerStats layer_stats(const MultilayerGraph &graph, Layer layer);

/// Number of crosslayer edges.
size_t crosslayer_edge_count(const MultilayerGraph &graph);

enum class CostModel {
  Weighted,  // sum of weight * length_km, in hours
  Hops,      // unit cost per edge
};

struct ShortestPathResult {
  double cost = 0.0;
  std::vector<NodeIndex> path;  // src first, dst last
};

/// Single-source shortest-path costs to every node. Unreachable nodes get
/// +infinity.
std::vector<double> shortest_path_costs(const MultilayerGraph &graph,
                                        NodeIndex src, CostModel model);

/**
 * Least-cost path between two nodes. Among equal-cost paths the
 * lexicographically smallest node-id sequence is returned. Empty optional
 * when dst is unreachable from src; cost 0 and path {src} when src == dst.
 */
std::optional<ShortestPathResult> shortest_path(const MultilayerGraph &graph,
                                                NodeIndex src, NodeIndex dst,
                                                CostModel model = CostModel::Weighted);
std::optional<ShortestPathResult> shortest_path(const MultilayerGraph &graph,
                                                std::string_view src_id,
                                                std::string_view dst_id,
                                                CostModel model = CostModel::Weighted);

}  // namespace ctmap::graph

#endif  // CTMAP_GRAPH_HPP
