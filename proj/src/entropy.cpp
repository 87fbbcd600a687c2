#include "ctmap/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "ctmap/parallel.hpp"
#include "ctmap/rng.hpp"

namespace ctmap::entropy {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

inline uint64_t edge_key(graph::NodeIndex a, graph::NodeIndex b) {
  if (a > b) std::swap(a, b);
  return (uint64_t(a) << 32) | b;
}

// One BFS layering from s plus a sweep over the shortest-path DAG yields,
// for every node v, the total walker probability mass arriving at v along
// hop-count shortest paths. reach[v] is left infinite when unreachable.
struct SourceSweep {
  std::vector<double> dist;
  std::vector<double> mass;
};

SourceSweep sweep_from(const graph::MultilayerGraph &g, graph::NodeIndex s) {
  const size_t n = g.node_count();
  SourceSweep out;
  out.dist.assign(n, kInf);
  out.mass.assign(n, 0.0);
  std::vector<graph::NodeIndex> bfs_order;
  bfs_order.reserve(n);
  out.dist[s] = 0.0;
  out.mass[s] = 1.0;
  bfs_order.push_back(s);
  for (size_t head = 0; head < bfs_order.size(); ++head) {
    const graph::NodeIndex u = bfs_order[head];
    for (const graph::HalfEdge &e : g.neighbors(u)) {
      if (out.dist[e.to] == kInf) {
        out.dist[e.to] = out.dist[u] + 1.0;
        bfs_order.push_back(e.to);
      }
    }
  }
  for (const graph::NodeIndex u : bfs_order) {
    if (out.mass[u] == 0.0) continue;  // off every shortest-path DAG branch
    const size_t k = g.degree(u);
    const double factor = (u == s) ? 1.0 / double(k) : 1.0 / double(k - 1);
    for (const graph::HalfEdge &e : g.neighbors(u)) {
      if (out.dist[e.to] == out.dist[u] + 1.0) {
        out.mass[e.to] += out.mass[u] * factor;
      }
    }
  }
  return out;
}

double bits_from_mass(double mass) {
  double bits = -std::log2(mass);
  // FP rounding can push the path mass epsilon past 1; clamp what is
  // mathematically a 0.
  if (bits < 0.0 && bits > -1e-9) bits = 0.0;
  return bits;
}

}  // namespace

double path_probability(const graph::MultilayerGraph &g,
                        const std::vector<graph::NodeIndex> &path) {
  if (path.size() < 2) {
    throw std::invalid_argument("path must have at least 2 nodes");
  }
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    if (!g.has_edge(path[i], path[i + 1])) {
      throw std::invalid_argument("path nodes " + g.node(path[i]).id + " and " +
                                  g.node(path[i + 1]).id + " are not adjacent");
    }
  }
  double p = 1.0 / double(g.degree(path.front()));
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    const size_t k = g.degree(path[i]);
    if (k < 2) {
      throw std::invalid_argument("interior node " + g.node(path[i]).id +
                                  " has degree " + std::to_string(k) +
                                  "; not a shortest path");
    }
    p *= 1.0 / double(k - 1);
  }
  return p;
}

std::optional<double> pair_search_information(const graph::MultilayerGraph &g,
                                              graph::NodeIndex s,
                                              graph::NodeIndex t) {
  if (s == t) throw std::invalid_argument("pair_search_information: s == t");
  const SourceSweep sw = sweep_from(g, s);
  if (sw.dist[t] == kInf) return std::nullopt;
  return bits_from_mass(sw.mass[t]);
}

EntropyReport search_entropy(const graph::MultilayerGraph &g,
                             const SamplingPlan &plan,
                             std::vector<PairSample> *samples) {
  if (plan.pair_budget < 1) {
    throw std::invalid_argument("pair budget must be at least 1");
  }
  const size_t n = g.node_count();
  if (samples) samples->clear();
  EntropyReport report;
  report.N = n;
  report.sampling_seed = plan.seed;
  if (n < 2) {
    report.exact = true;
    return report;
  }

  const size_t all_pairs = n * (n - 1);
  report.exact = all_pairs <= plan.pair_budget;

  double sum_bits = 0.0;
  size_t reachable = 0, unreachable = 0;

  if (report.exact) {
    struct Slot {
      double sum = 0.0;
      size_t reach = 0, unreach = 0;
      std::vector<PairSample> rows;
    };
    std::vector<Slot> slots(n);
    par::parallel_for(n, plan.jobs, [&](size_t s) {
      const SourceSweep sw = sweep_from(g, graph::NodeIndex(s));
      Slot &slot = slots[s];
      for (size_t t = 0; t < n; ++t) {
        if (t == s) continue;
        if (sw.dist[t] == kInf) {
          ++slot.unreach;
        } else {
          const double bits = bits_from_mass(sw.mass[t]);
          slot.sum += bits;
          ++slot.reach;
          if (samples) {
            slot.rows.push_back(
                {graph::NodeIndex(s), graph::NodeIndex(t), bits});
          }
        }
      }
    });
    for (auto &slot : slots) {
      sum_bits += slot.sum;
      reachable += slot.reach;
      unreachable += slot.unreach;
      if (samples) {
        samples->insert(samples->end(), slot.rows.begin(), slot.rows.end());
      }
    }
  } else {
    // Draw the pair sample up front, then evaluate each distinct source
    // once; the mean runs in draw order so the job count never shows.
    rng::Rng r(plan.seed);
    std::vector<std::pair<graph::NodeIndex, graph::NodeIndex>> pairs;
    pairs.reserve(plan.pair_budget);
    for (size_t i = 0; i < plan.pair_budget; ++i) {
      const auto s = graph::NodeIndex(r.below(n));
      auto t = graph::NodeIndex(r.below(n - 1));
      if (t >= s) ++t;
      pairs.emplace_back(s, t);
    }
    std::vector<graph::NodeIndex> sources;
    sources.reserve(pairs.size());
    for (const auto &[s, t] : pairs) sources.push_back(s);
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

    std::vector<SourceSweep> sweeps(sources.size());
    par::parallel_for(sources.size(), plan.jobs, [&](size_t i) {
      sweeps[i] = sweep_from(g, sources[i]);
    });
    for (const auto &[s, t] : pairs) {
      const size_t si =
          std::lower_bound(sources.begin(), sources.end(), s) - sources.begin();
      const SourceSweep &sw = sweeps[si];
      if (sw.dist[t] == kInf) {
        ++unreachable;
      } else {
        const double bits = bits_from_mass(sw.mass[t]);
        sum_bits += bits;
        ++reachable;
        if (samples) samples->push_back({s, t, bits});
      }
    }
  }

  report.pairs_evaluated = reachable;
  report.unreachable_pairs = unreachable;
  report.S_avg = reachable ? sum_bits / double(reachable) : 0.0;
  report.sigma = report.S_avg / std::log2(double(n));
  return report;
}

EntropyReport search_entropy_with_baseline(const graph::MultilayerGraph &g,
                                           const SamplingPlan &plan,
                                           size_t swap_factor,
                                           std::vector<PairSample> *samples) {
  EntropyReport report = search_entropy(g, plan, samples);
  if (report.N < 2) return report;
  const graph::MultilayerGraph rewired =
      randomize_preserving_degrees(g, swap_factor, plan.seed);
  const EntropyReport random_report = search_entropy(rewired, plan);
  report.S_R = random_report.S_avg;
  report.delta = (report.S_avg - report.S_R) / std::log2(double(report.N));
  return report;
}

graph::MultilayerGraph randomize_preserving_degrees(
    const graph::MultilayerGraph &g, size_t swap_factor, uint64_t seed) {
  if (g.edge_count() < 2) {
    throw std::invalid_argument("need at least 2 edges to rewire");
  }
  std::vector<std::pair<graph::NodeIndex, graph::NodeIndex>> edges;
  edges.reserve(g.edge_count());
  std::unordered_set<uint64_t> present;
  present.reserve(g.edge_count() * 2);
  for (const graph::EdgeRecord &e : g.edges()) {
    edges.emplace_back(e.src, e.dst);
    present.insert(edge_key(e.src, e.dst));
  }

  rng::Rng r(seed);
  const size_t attempts = swap_factor * edges.size();
  for (size_t a = 0; a < attempts; ++a) {
    const size_t i = size_t(r.below(edges.size()));
    const size_t j = size_t(r.below(edges.size()));
    const bool flip = r.bernoulli(0.5);
    if (i == j) continue;
    auto [p, q] = edges[i];
    auto [u, v] = edges[j];
    if (flip) std::swap(u, v);
    // proposed rewiring: (p,q),(u,v) -> (p,v),(u,q)
    if (p == v || u == q) continue;
    const uint64_t k1 = edge_key(p, v), k2 = edge_key(u, q);
    if (k1 == k2 || present.count(k1) || present.count(k2)) continue;
    present.erase(edge_key(p, q));
    present.erase(edge_key(u, v));
    present.insert(k1);
    present.insert(k2);
    edges[i] = {p, v};
    edges[j] = {u, q};
  }

  graph::MultilayerGraph out;
  for (graph::NodeIndex i = 0; i < g.node_count(); ++i) {
    const graph::Node &node = g.node(i);
    out.add_node(node.id, node.pos, node.layer);
  }
  for (const auto &[a, b] : edges) {
    const double len =
        std::max(geo::distance_km(g.node(a).pos, g.node(b).pos), 0.01);
    // Rewired endpoints may sit on different layers; the uniform road_local
    // class is deliberate (the walker ignores classes), hence unchecked.
    out.add_edge_unchecked(a, b, graph::EdgeClass::RoadLocal, len);
  }
  return out;
}

}  // namespace ctmap::entropy
