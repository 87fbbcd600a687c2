#include "ctmap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace ctmap::graph {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative tolerance used to recognize equal-cost paths when extracting the
// lexicographically smallest one.
inline bool close(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}
}  // namespace

std::string layer_name(Layer layer) {
  switch (layer) {
    case Layer::Road: return "road";
    case Layer::Metro: return "metro";
    case Layer::Train: return "train";
  }
  return "?";
}

Layer parse_layer(std::string_view name) {
  if (name == "road") return Layer::Road;
  if (name == "metro") return Layer::Metro;
  if (name == "train") return Layer::Train;
  throw std::invalid_argument("unknown layer: " + std::string(name));
}

std::string edge_class_name(EdgeClass cls) {
  switch (cls) {
    case EdgeClass::Metro: return "metro";
    case EdgeClass::RoadHighway: return "road_highway";
    case EdgeClass::RoadPrincipal: return "road_principal";
    case EdgeClass::RoadRegional: return "road_regional";
    case EdgeClass::RoadLocal: return "road_local";
    case EdgeClass::Crosslayer: return "crosslayer";
    case EdgeClass::Train: return "train";
  }
  return "?";
}

EdgeClass parse_edge_class(std::string_view name) {
  if (name == "metro") return EdgeClass::Metro;
  if (name == "road_highway") return EdgeClass::RoadHighway;
  if (name == "road_principal") return EdgeClass::RoadPrincipal;
  if (name == "road_regional") return EdgeClass::RoadRegional;
  if (name == "road_local") return EdgeClass::RoadLocal;
  if (name == "crosslayer") return EdgeClass::Crosslayer;
  if (name == "train") return EdgeClass::Train;
  throw std::invalid_argument("unknown edge class: " + std::string(name));
}

double edge_class_weight(EdgeClass cls) {
  switch (cls) {
    case EdgeClass::Metro: return 1.0 / 80.0;
    case EdgeClass::RoadHighway: return 1.0 / 90.0;
    case EdgeClass::RoadPrincipal: return 1.0 / 60.0;
    case EdgeClass::RoadRegional: return 1.0 / 40.0;
    case EdgeClass::RoadLocal: return 1.0 / 30.0;
    case EdgeClass::Crosslayer: return 1.0 / 10.0;
    case EdgeClass::Train: return 1.0 / 100.0;
  }
  return 0.0;
}

bool edge_class_matches_layers(EdgeClass cls, Layer a, Layer b) {
  switch (cls) {
    case EdgeClass::Crosslayer: return a != b;
    case EdgeClass::Metro: return a == Layer::Metro && b == Layer::Metro;
    case EdgeClass::Train: return a == Layer::Train && b == Layer::Train;
    default: return a == Layer::Road && b == Layer::Road;
  }
}

NodeIndex MultilayerGraph::add_node(std::string id, geo::LatLon pos,
                                    Layer layer) {
  if (!geo::valid_coordinates(pos)) {
    throw std::invalid_argument("node " + id + ": coordinates out of range");
  }
  auto [it, inserted] = index_.emplace(id, NodeIndex(nodes_.size()));
  if (!inserted) {
    throw std::invalid_argument("duplicate node id: " + id);
  }
  nodes_.push_back(Node{std::move(id), pos, layer});
  adjacency_.emplace_back();
  return it->second;
}

void MultilayerGraph::add_edge(NodeIndex src, NodeIndex dst, EdgeClass cls,
                               std::optional<double> length_km) {
  if (src >= nodes_.size() || dst >= nodes_.size()) {
    throw std::out_of_range("edge endpoint index out of range");
  }
  if (!edge_class_matches_layers(cls, nodes_[src].layer, nodes_[dst].layer)) {
    throw std::invalid_argument(
        "edge " + nodes_[src].id + "-" + nodes_[dst].id + ": class " +
        edge_class_name(cls) + " inconsistent with layers " +
        layer_name(nodes_[src].layer) + "/" + layer_name(nodes_[dst].layer));
  }
  double length = length_km.value_or(
      geodesic_distance(nodes_[src].pos, nodes_[dst].pos));
  if (!(length > 0.0)) {
    throw std::invalid_argument("edge " + nodes_[src].id + "-" +
                                nodes_[dst].id + ": length must be > 0");
  }
  add_edge_unchecked(src, dst, cls, length);
}

void MultilayerGraph::add_edge_unchecked(NodeIndex src, NodeIndex dst,
                                         EdgeClass cls, double length_km) {
  if (src == dst) {
    throw std::invalid_argument("self loop at node " + nodes_[src].id);
  }
  if (has_edge(src, dst)) {
    throw std::invalid_argument("duplicate edge " + nodes_[src].id + "-" +
                                nodes_[dst].id);
  }
  const double w = edge_class_weight(cls);
  adjacency_[src].push_back(HalfEdge{dst, cls, length_km, w});
  adjacency_[dst].push_back(HalfEdge{src, cls, length_km, w});
  ++edge_count_;
}

void MultilayerGraph::add_edge(std::string_view src_id, std::string_view dst_id,
                               EdgeClass cls, std::optional<double> length_km) {
  add_edge(index_of(src_id), index_of(dst_id), cls, length_km);
}

std::optional<NodeIndex> MultilayerGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex MultilayerGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw std::out_of_range("unknown node id: " + std::string(id));
  }
  return it->second;
}

bool MultilayerGraph::has_edge(NodeIndex a, NodeIndex b) const {
  return edge_between(a, b) != nullptr;
}

const HalfEdge *MultilayerGraph::edge_between(NodeIndex a, NodeIndex b) const {
  for (const HalfEdge &e : adjacency_[a]) {
    if (e.to == b) return &e;
  }
  return nullptr;
}

std::vector<EdgeRecord> MultilayerGraph::edges() const {
  std::vector<EdgeRecord> out;
  out.reserve(edge_count_);
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    for (const HalfEdge &e : adjacency_[i]) {
      if (nodes_[i].id < nodes_[e.to].id) {
        out.push_back(EdgeRecord{i, e.to, e.cls, e.length_km, e.weight});
      }
    }
  }
  std::sort(out.begin(), out.end(), [this](const EdgeRecord &a, const EdgeRecord &b) {
    const auto ka = std::tie(nodes_[a.src].id, nodes_[a.dst].id);
    const auto kb = std::tie(nodes_[b.src].id, nodes_[b.dst].id);
    return ka < kb;
  });
  return out;
}

MultilayerGraph MultilayerGraph::layer_subgraph(Layer layer) const {
  MultilayerGraph sub;
  for (const Node &n : nodes_) {
    if (n.layer == layer) sub.add_node(n.id, n.pos, n.layer);
  }
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].layer != layer) continue;
    for (const HalfEdge &e : adjacency_[i]) {
      if (i < e.to && nodes_[e.to].layer == layer) {
        sub.add_edge(sub.index_of(nodes_[i].id), sub.index_of(nodes_[e.to].id),
                     e.cls, e.length_km);
      }
    }
  }
  return sub;
}

std::vector<NodeIndex> MultilayerGraph::nodes_of_layer(Layer layer) const {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].layer == layer) out.push_back(i);
  }
  return out;
}

NodeIndex MultilayerGraph::nearest_node(const geo::LatLon &point) const {
  NodeIndex best = kInvalidNode;
  double best_d = kInf;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    const double d = geodesic_distance(point, nodes_[i].pos);
    if (d < best_d ||
        (d == best_d && best != kInvalidNode && nodes_[i].id < nodes_[best].id)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::vector<NodeIndex> MultilayerGraph::nodes_near(const geo::LatLon &point,
                                                   double radius_km) const {
  std::vector<std::pair<double, NodeIndex>> hits;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    const double d = geodesic_distance(point, nodes_[i].pos);
    if (d <= radius_km) hits.emplace_back(d, i);
  }
  std::sort(hits.begin(), hits.end(), [this](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first < b.first;
    return nodes_[a.second].id < nodes_[b.second].id;
  });
  std::vector<NodeIndex> out;
  out.reserve(hits.size());
  for (const auto &[d, i] : hits) out.push_back(i);
  return out;
}

bool MultilayerGraph::connected() const {
  if (nodes_.empty()) return true;
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeIndex> stack{0};
  seen[0] = 1;
  size_t count = 1;
  while (!stack.empty()) {
    NodeIndex u = stack.back();
    stack.pop_back();
    for (const HalfEdge &e : adjacency_[u]) {
      if (!seen[e.to]) {
        seen[e.to] = 1;
        ++count;
        stack.push_back(e.to);
      }
    }
  }
  return count == nodes_.size();
}

ConnectLayersReport connect_layers(MultilayerGraph &graph, double radius_km) {
  if (!(radius_km > 0.0)) {
    throw std::invalid_argument("connect_layers: radius must be > 0");
  }
  ConnectLayersReport report;
  const Layer all_layers[] = {Layer::Road, Layer::Metro, Layer::Train};
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    const Node &station = graph.node(i);
    if (station.layer == Layer::Road) continue;
    bool any_link = false;
    for (Layer other : all_layers) {
      if (other == station.layer) continue;
      NodeIndex best = kInvalidNode;
      double best_d = kInf;
      for (NodeIndex j = 0; j < graph.node_count(); ++j) {
        if (graph.node(j).layer != other) continue;
        const double d = geodesic_distance(station.pos, graph.node(j).pos);
        if (d <= radius_km &&
            (d < best_d || (d == best_d && best != kInvalidNode &&
                            graph.node(j).id < graph.node(best).id))) {
          best = j;
          best_d = d;
        }
      }
      if (best == kInvalidNode) continue;
      if (graph.has_edge(i, best)) {
        any_link = true;
        continue;
      }
      // Stations sitting on top of a node would otherwise yield a
      // zero-length edge; floor keeps all costs positive.
      const double length = std::max(best_d, 0.01);
      graph.add_edge(i, best, EdgeClass::Crosslayer, length);
      ++report.edges_added;
      any_link = true;
    }
    if (!any_link) report.unconnected_stations.push_back(station.id);
  }
  return report;
}

double geodesic_distance(const geo::LatLon &a, const geo::LatLon &b) {
  return geo::distance_km(a, b);
}

LayerStats layer_stats(const MultilayerGraph &graph, Layer layer) {
  LayerStats stats;
  double total_len = 0.0;
  size_t degree_sum = 0;
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    if (graph.node(i).layer != layer) continue;
    ++stats.nodes;
    for (const HalfEdge &e : graph.neighbors(i)) {
      if (graph.node(e.to).layer != layer || e.cls == EdgeClass::Crosslayer) {
        continue;
      }
      ++degree_sum;
      if (i < e.to) {
        ++stats.edges;
        total_len += e.length_km;
      }
    }
  }
  if (stats.nodes > 0) stats.mean_degree = double(degree_sum) / double(stats.nodes);
  if (stats.edges > 0) stats.mean_edge_length_km = total_len / double(stats.edges);
  return stats;
}

size_t crosslayer_edge_count(const MultilayerGraph &graph) {
  size_t count = 0;
  for (const EdgeRecord &e : graph.edges()) {
    if (e.cls == EdgeClass::Crosslayer) ++count;
  }
  return count;
}

std::vector<double> shortest_path_costs(const MultilayerGraph &graph,
                                        NodeIndex src, CostModel model) {
  const size_t n = graph.node_count();
  if (src >= n) throw std::out_of_range("shortest_path_costs: bad source");
  std::vector<double> dist(n, kInf);
  dist[src] = 0.0;
  if (model == CostModel::Hops) {
    std::queue<NodeIndex> q;
    q.push(src);
    while (!q.empty()) {
      NodeIndex u = q.front();
      q.pop();
      for (const HalfEdge &e : graph.neighbors(u)) {
        if (dist[e.to] == kInf) {
          dist[e.to] = dist[u] + 1.0;
          q.push(e.to);
        }
      }
    }
    return dist;
  }
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  pq.emplace(0.0, src);
  std::vector<char> settled(n, 0);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    for (const HalfEdge &e : graph.neighbors(u)) {
      const double nd = d + e.weight * e.length_km;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        pq.emplace(nd, e.to);
      }
    }
  }
  return dist;
}

std::optional<ShortestPathResult> shortest_path(const MultilayerGraph &graph,
                                                NodeIndex src, NodeIndex dst,
                                                CostModel model) {
  if (src >= graph.node_count() || dst >= graph.node_count()) {
    throw std::out_of_range("shortest_path: node index out of range");
  }
  if (src == dst) return ShortestPathResult{0.0, {src}};

  const std::vector<double> from_src = shortest_path_costs(graph, src, model);
  if (from_src[dst] == kInf) return std::nullopt;
  // Undirected graph: distances from dst double as distances to dst.
  const std::vector<double> from_dst = shortest_path_costs(graph, dst, model);
  const double total = from_src[dst];

  // Walk forward, always taking the smallest-id neighbor that stays on some
  // least-cost path; this yields the lexicographically smallest sequence.
  ShortestPathResult result;
  result.cost = total;
  result.path.push_back(src);
  NodeIndex u = src;
  while (u != dst) {
    NodeIndex next = kInvalidNode;
    for (const HalfEdge &e : graph.neighbors(u)) {
      const double step = model == CostModel::Hops ? 1.0 : e.weight * e.length_km;
      if (!close(from_src[u] + step, from_src[e.to])) continue;
      if (!close(from_src[e.to] + from_dst[e.to], total)) continue;
      if (next == kInvalidNode || graph.node(e.to).id < graph.node(next).id) {
        next = e.to;
      }
    }
    if (next == kInvalidNode) {
      throw std::logic_error("shortest_path: dead end while reconstructing");
    }
    result.path.push_back(next);
    u = next;
  }
  return result;
}

std::optional<ShortestPathResult> shortest_path(const MultilayerGraph &graph,
                                                std::string_view src_id,
                                                std::string_view dst_id,
                                                CostModel model) {
  return shortest_path(graph, graph.index_of(src_id), graph.index_of(dst_id),
                       model);
}

}  // namespace ctmap::graph
