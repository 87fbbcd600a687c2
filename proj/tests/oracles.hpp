/**
 * Brute-force oracles shared by the unit and acceptance tests.
 *
 * Everything here recomputes its answer by blunt enumeration or recursion,
 * deliberately avoiding the library's algorithms (Dijkstra, DAG dynamic
 * programming, rolling-array DP), so agreement between the two routes is
 * meaningful. All of it is exponential or quadratic; keep inputs small.
 */

#ifndef CTMAP_TESTS_ORACLES_HPP
#define CTMAP_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "ctmap/geo.hpp"
#include "ctmap/graph.hpp"
#include "ctmap/rng.hpp"

namespace oracles {

using ctmap::graph::CostModel;
using ctmap::graph::MultilayerGraph;
using ctmap::graph::NodeIndex;

inline std::vector<std::string> id_sequence(const MultilayerGraph &g,
                                            const std::vector<NodeIndex> &p) {
  std::vector<std::string> ids;
  ids.reserve(p.size());
  for (const NodeIndex v : p) ids.push_back(g.node(v).id);
  return ids;
}

struct PathResult {
  double cost = 0.0;
  std::vector<NodeIndex> path;
};

/**
 * Minimum-cost simple path by depth-first enumeration of every simple path,
 * keeping the lexicographically smallest id sequence among ties (ties within
 * 1e-12 of the minimum). Exponential; graphs of ~8 nodes only.
 */
inline std::optional<PathResult> exhaustive_shortest_path(
    const MultilayerGraph &g, NodeIndex src, NodeIndex dst, CostModel model) {
  std::optional<PathResult> best;
  std::vector<NodeIndex> stack{src};
  std::vector<bool> on_path(g.node_count(), false);
  on_path[src] = true;

  auto consider = [&](double cost) {
    if (!best || cost < best->cost - 1e-12) {
      best = PathResult{cost, stack};
    } else if (cost <= best->cost + 1e-12 &&
               id_sequence(g, stack) < id_sequence(g, best->path)) {
      best = PathResult{cost, stack};
    }
  };

  std::function<void(NodeIndex, double)> dfs = [&](NodeIndex u, double cost) {
    if (u == dst) {
      consider(cost);
      return;
    }
    for (const ctmap::graph::HalfEdge &e : g.neighbors(u)) {
      if (on_path[e.to]) continue;
      on_path[e.to] = true;
      stack.push_back(e.to);
      const double step =
          model == CostModel::Weighted ? e.weight * e.length_km : 1.0;
      dfs(e.to, cost + step);
      stack.pop_back();
      on_path[e.to] = false;
    }
  };
  if (src == dst) return PathResult{0.0, {src}};
  dfs(src, 0.0);
  return best;
}

/// Hop distances from src by a plain queue BFS.
inline std::vector<int> bfs_hops(const MultilayerGraph &g, NodeIndex src) {
  std::vector<int> dist(g.node_count(), -1);
  std::queue<NodeIndex> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    const NodeIndex u = q.front();
    q.pop();
    for (const ctmap::graph::HalfEdge &e : g.neighbors(u)) {
      if (dist[e.to] == -1) {
        dist[e.to] = dist[u] + 1;
        q.push(e.to);
      }
    }
  }
  return dist;
}

/// Every hop-count shortest path src -> dst, enumerated over the BFS layering.
inline std::vector<std::vector<NodeIndex>> all_hop_shortest_paths(
    const MultilayerGraph &g, NodeIndex src, NodeIndex dst) {
  std::vector<std::vector<NodeIndex>> out;
  const std::vector<int> dist = bfs_hops(g, src);
  if (dist[dst] == -1) return out;
  std::vector<NodeIndex> stack{src};
  std::function<void(NodeIndex)> dfs = [&](NodeIndex u) {
    if (u == dst) {
      out.push_back(stack);
      return;
    }
    for (const ctmap::graph::HalfEdge &e : g.neighbors(u)) {
      if (dist[e.to] != dist[u] + 1) continue;
      if (dist[e.to] > dist[dst]) continue;
      stack.push_back(e.to);
      dfs(e.to);
      stack.pop_back();
    }
  };
  dfs(src);
  return out;
}

/// Walker probability of one path, evaluated directly from the degrees.
inline double walker_probability(const MultilayerGraph &g,
                                 const std::vector<NodeIndex> &path) {
  double p = 1.0 / double(g.degree(path.front()));
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    p *= 1.0 / double(g.degree(path[i]) - 1);
  }
  return p;
}

/// -log2 of the summed walker probability over all hop-shortest paths,
/// by explicit enumeration. Empty when dst is unreachable.
inline std::optional<double> pair_bits_oracle(const MultilayerGraph &g,
                                              NodeIndex src, NodeIndex dst) {
  const auto paths = all_hop_shortest_paths(g, src, dst);
  if (paths.empty()) return std::nullopt;
  double mass = 0.0;
  for (const auto &p : paths) mass += walker_probability(g, p);
  return -std::log2(mass);
}

/**
 * Unit-cost edit distance by memo-less recursion over all alignments.
 * `match(i, j)` decides whether element i of the first sequence matches
 * element j of the second. 3^(n+m) work; lengths <= 6 only.
 */
template <typename MatchFn>
inline size_t unit_edit_oracle(size_t n, size_t m, const MatchFn &match) {
  std::function<size_t(size_t, size_t)> rec = [&](size_t i, size_t j) -> size_t {
    if (i == 0) return j;
    if (j == 0) return i;
    size_t best = rec(i - 1, j - 1) + (match(i - 1, j - 1) ? 0 : 1);
    best = std::min(best, rec(i - 1, j) + 1);
    best = std::min(best, rec(i, j - 1) + 1);
    return best;
  };
  return rec(n, m);
}

inline double oracle_node_dist(const MultilayerGraph &g, NodeIndex a,
                               NodeIndex b) {
  if (a == b) return 0.0;
  return ctmap::geo::distance_km(g.node(a).pos, g.node(b).pos);
}

/**
 * Distance-weighted edit distance by memo-less recursion. Substitution
 * costs the node distance; removing pred[i-1] while aligned between truth
 * positions j-1 and j costs its distance to the nearer existing neighbor,
 * and insertion mirrors that on the other sequence.
 */
inline double km_edit_oracle(const MultilayerGraph &g,
                             const std::vector<NodeIndex> &pred,
                             const std::vector<NodeIndex> &truth) {
  const size_t n = pred.size(), m = truth.size();
  auto del_cost = [&](size_t i, size_t j) {
    double best = std::numeric_limits<double>::infinity();
    if (j >= 1) best = std::min(best, oracle_node_dist(g, pred[i - 1], truth[j - 1]));
    if (j < m) best = std::min(best, oracle_node_dist(g, pred[i - 1], truth[j]));
    return best;
  };
  auto ins_cost = [&](size_t i, size_t j) {
    double best = std::numeric_limits<double>::infinity();
    if (i >= 1) best = std::min(best, oracle_node_dist(g, truth[j - 1], pred[i - 1]));
    if (i < n) best = std::min(best, oracle_node_dist(g, truth[j - 1], pred[i]));
    return best;
  };
  std::function<double(size_t, size_t)> rec = [&](size_t i, size_t j) -> double {
    if (i == 0 && j == 0) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    if (i > 0 && j > 0) {
      best = std::min(best,
                      rec(i - 1, j - 1) + oracle_node_dist(g, pred[i - 1], truth[j - 1]));
    }
    if (i > 0) best = std::min(best, rec(i - 1, j) + del_cost(i, j));
    if (j > 0) best = std::min(best, rec(i, j - 1) + ins_cost(i, j));
    return best;
  };
  return rec(n, m);
}

struct MatchCount {
  size_t matched = 0;
  size_t pred_set = 0;
  size_t truth_set = 0;
};

/**
 * Greedy one-to-one matching re-derived with repeated minimum scans over
 * the remaining pairs: each round picks the smallest (distance, pred id,
 * truth id) pair among unused nodes.
 */
inline MatchCount greedy_match_oracle(const MultilayerGraph &g,
                                      const std::vector<NodeIndex> &pred,
                                      const std::vector<NodeIndex> &truth,
                                      double epsilon_km) {
  std::vector<NodeIndex> ps = pred, ts = truth;
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  MatchCount out;
  out.pred_set = ps.size();
  out.truth_set = ts.size();
  std::vector<bool> pu(ps.size(), false), tu(ts.size(), false);
  for (;;) {
    double best_d = std::numeric_limits<double>::infinity();
    size_t bi = SIZE_MAX, bj = SIZE_MAX;
    for (size_t i = 0; i < ps.size(); ++i) {
      if (pu[i]) continue;
      for (size_t j = 0; j < ts.size(); ++j) {
        if (tu[j]) continue;
        const double d = oracle_node_dist(g, ps[i], ts[j]);
        if (d > epsilon_km) continue;
        bool better = d < best_d;
        if (d == best_d && bi != SIZE_MAX) {
          const auto ka = std::make_pair(g.node(ps[i]).id, g.node(ts[j]).id);
          const auto kb = std::make_pair(g.node(ps[bi]).id, g.node(ts[bj]).id);
          better = ka < kb;
        }
        if (better) {
          best_d = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == SIZE_MAX) break;
    pu[bi] = tu[bj] = true;
    ++out.matched;
  }
  return out;
}

inline double rmse_oracle(const MultilayerGraph &g,
                          const std::vector<NodeIndex> &pred,
                          const std::vector<NodeIndex> &truth) {
  double sum = 0.0;
  for (const NodeIndex p : pred) {
    double best = std::numeric_limits<double>::infinity();
    for (const NodeIndex t : truth) best = std::min(best, oracle_node_dist(g, p, t));
    sum += best * best;
  }
  return std::sqrt(sum / double(pred.size()));
}

/**
 * Random connected road graph: n nodes scattered near the origin, a random
 * spanning tree plus `extra` random edges, everything road_local. Node ids
 * are zero-padded so id order equals index order.
 */
inline MultilayerGraph random_road_graph(ctmap::rng::Rng &rng, size_t n,
                                         size_t extra) {
  MultilayerGraph g;
  for (size_t i = 0; i < n; ++i) {
    std::string id = "n" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    g.add_node(std::move(id),
               {48.8 + rng.uniform(0.0, 0.08), 2.3 + rng.uniform(0.0, 0.08)},
               ctmap::graph::Layer::Road);
  }
  for (size_t i = 1; i < n; ++i) {
    const NodeIndex j = NodeIndex(rng.below(i));
    g.add_edge(NodeIndex(i), j, ctmap::graph::EdgeClass::RoadLocal,
               rng.uniform(0.3, 2.5));
  }
  for (size_t k = 0; k < extra; ++k) {
    const NodeIndex a = NodeIndex(rng.below(n));
    const NodeIndex b = NodeIndex(rng.below(n));
    if (a == b || g.has_edge(a, b)) continue;
    g.add_edge(a, b, ctmap::graph::EdgeClass::RoadLocal, rng.uniform(0.3, 2.5));
  }
  return g;
}

}  // namespace oracles

#endif  // CTMAP_TESTS_ORACLES_HPP
