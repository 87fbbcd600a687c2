#include "ctmap/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctmap::mapper {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

inline uint64_t pair_key(graph::NodeIndex a, graph::NodeIndex b) {
  return (uint64_t(a) << 32) | b;
}

double min_incident_cost(const graph::MultilayerGraph &g, graph::NodeIndex v) {
  double best = kInf;
  for (const graph::HalfEdge &e : g.neighbors(v)) {
    best = std::min(best, e.weight * e.length_km);
  }
  return best;
}

double self_cost_hours(const graph::MultilayerGraph &g, graph::NodeIndex v,
                       const MapperParams &params) {
  if (params.self_cost_mode == SelfCostMode::HalfMinEdge) {
    const double m = min_incident_cost(g, v);
    if (m != kInf) return 0.5 * m;
    // isolated node: fall through to the fixed epsilon
  }
  return params.self_cost_epsilon_hours;
}

void validate_trajectory(const CellularTrajectory &traj) {
  if (traj.observations.size() < 2) {
    throw std::invalid_argument("trajectory " + traj.trajectory_id +
                                ": needs at least 2 observations");
  }
  for (size_t i = 1; i < traj.observations.size(); ++i) {
    if (traj.observations[i].timestamp <= traj.observations[i - 1].timestamp) {
      throw std::invalid_argument("trajectory " + traj.trajectory_id +
                                  ": timestamps not strictly increasing");
    }
  }
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::CtMapper: return "ctmapper";
    case Algorithm::Baseline1: return "baseline1";
    case Algorithm::Baseline2: return "baseline2";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "ctmapper") return Algorithm::CtMapper;
  if (name == "baseline1") return Algorithm::Baseline1;
  if (name == "baseline2") return Algorithm::Baseline2;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected ctmapper, baseline1 or baseline2)");
}

std::string self_cost_mode_name(SelfCostMode m) {
  return m == SelfCostMode::HalfMinEdge ? "half_min_edge" : "fixed_epsilon";
}

SelfCostMode parse_self_cost_mode(std::string_view name) {
  if (name == "half_min_edge") return SelfCostMode::HalfMinEdge;
  if (name == "fixed_epsilon") return SelfCostMode::FixedEpsilon;
  throw std::invalid_argument("unknown self_cost_mode: " + std::string(name));
}

double emission_score(const cell_net::CellTower &tower,
                      const geo::LatLon &node_pos, const MapperParams &params) {
  const double d = geo::distance_km(tower.pos, node_pos);
  if (d <= tower.r_max) return 1.0;
  if (d <= params.tau_km) return std::pow(tower.r_max / d, params.beta);
  return 0.0;
}

std::vector<Candidate> candidate_states(const graph::MultilayerGraph &g,
                                        const cell_net::CellularNetwork &net,
                                        const Observation &obs,
                                        const MapperParams &params,
                                        bool *fallback_used) {
  if (g.node_count() == 0) throw std::invalid_argument("empty graph");
  if (fallback_used) *fallback_used = false;
  const cell_net::CellTower &tower = net.tower(net.index_of(obs.tower_id));

  std::vector<Candidate> all;
  for (graph::NodeIndex i = 0; i < g.node_count(); ++i) {
    const double d = geo::distance_km(tower.pos, g.node(i).pos);
    double em;
    if (d <= tower.r_max) {
      em = 1.0;
    } else if (d <= params.tau_km) {
      em = std::pow(tower.r_max / d, params.beta);
    } else {
      continue;
    }
    all.push_back(Candidate{i, em, d});
  }

  if (all.empty()) {
    const graph::NodeIndex nearest = g.nearest_node(tower.pos);
    if (fallback_used) *fallback_used = true;
    return {Candidate{nearest, params.fallback_emission,
                      geo::distance_km(tower.pos, g.node(nearest).pos)}};
  }

  std::sort(all.begin(), all.end(), [&g](const Candidate &a, const Candidate &b) {
    if (a.emission != b.emission) return a.emission > b.emission;
    if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
    return g.node(a.node).id < g.node(b.node).id;
  });
  if (all.size() > size_t(params.max_candidates)) {
    all.resize(size_t(params.max_candidates));
  }
  return all;
}

double transition_score(const graph::MultilayerGraph &g, graph::NodeIndex vi,
                        graph::NodeIndex vj, const MapperParams &params) {
  if (vi >= g.node_count() || vj >= g.node_count()) {
    throw std::out_of_range("transition_score: node index out of range");
  }
  if (vi == vj) return 1.0 / self_cost_hours(g, vi, params);
  const auto sp = graph::shortest_path(g, vi, vj, graph::CostModel::Weighted);
  if (!sp) return 0.0;
  return 1.0 / sp->cost;
}

double baseline2_transition_score(const graph::MultilayerGraph &g,
                                  graph::NodeIndex vi, graph::NodeIndex vj) {
  if (vi >= g.node_count() || vj >= g.node_count()) {
    throw std::out_of_range("baseline2_transition_score: node index out of range");
  }
  const size_t ki = g.degree(vi);
  if (ki == 0) return 0.0;
  if (vi == vj) return 1.0 / double(ki);
  const auto sp = graph::shortest_path(g, vi, vj, graph::CostModel::Hops);
  if (!sp) return 0.0;
  double denom = double(ki);
  for (size_t k = 1; k + 1 < sp->path.size(); ++k) {
    denom *= double(g.degree(sp->path[k]));
  }
  return 1.0 / denom;
}

TransitionScorer::TransitionScorer(const graph::MultilayerGraph &g,
                                   const MapperParams &params,
                                   TransitionModel model)
    : g_(g), params_(params), model_(model) {}

const std::vector<double> &TransitionScorer::costs_from(graph::NodeIndex src) {
  auto it = cost_cache_.find(src);
  if (it == cost_cache_.end()) {
    it = cost_cache_
             .emplace(src, graph::shortest_path_costs(
                               g_, src, graph::CostModel::Weighted))
             .first;
  }
  return it->second;
}

const std::vector<double> &TransitionScorer::hops_from(graph::NodeIndex src) {
  auto it = hop_cache_.find(src);
  if (it == hop_cache_.end()) {
    it = hop_cache_
             .emplace(src,
                      graph::shortest_path_costs(g_, src, graph::CostModel::Hops))
             .first;
  }
  return it->second;
}

double TransitionScorer::self_log_score(graph::NodeIndex v) {
  return -std::log(self_cost_hours(g_, v, params_));
}

double TransitionScorer::baseline2_log(graph::NodeIndex from,
                                       graph::NodeIndex to) {
  const size_t k_from = g_.degree(from);
  if (k_from == 0) return -kInf;
  if (from == to) return -std::log(double(k_from));
  const std::vector<double> &hf = hops_from(from);
  if (hf[to] == kInf) return -kInf;
  const std::vector<double> &ht = hops_from(to);
  // Lexicographically smallest hop-shortest path, reconstructed greedily on
  // the shortest-path DAG (hop distances are exact integers in doubles).
  double log_denom = std::log(double(k_from));
  graph::NodeIndex u = from;
  while (u != to) {
    graph::NodeIndex next = graph::kInvalidNode;
    for (const graph::HalfEdge &e : g_.neighbors(u)) {
      if (hf[e.to] != hf[u] + 1.0) continue;
      if (hf[e.to] + ht[e.to] != hf[to]) continue;
      if (next == graph::kInvalidNode ||
          g_.node(e.to).id < g_.node(next).id) {
        next = e.to;
      }
    }
    if (next == graph::kInvalidNode) {
      throw std::logic_error("baseline2 path reconstruction dead end");
    }
    if (next != to) log_denom += std::log(double(g_.degree(next)));
    u = next;
  }
  return -log_denom;
}

double TransitionScorer::log_score(graph::NodeIndex from, graph::NodeIndex to) {
  const uint64_t key = pair_key(from, to);
  auto it = pair_cache_.find(key);
  if (it != pair_cache_.end()) return it->second;

  double value;
  if (model_ == TransitionModel::CtMapper) {
    if (from == to) {
      value = self_log_score(from);
    } else {
      const double c = costs_from(from)[to];
      value = (c == kInf) ? -kInf : -std::log(c);
    }
  } else {
    value = baseline2_log(from, to);
  }
  pair_cache_.emplace(key, value);
  return value;
}

DecodedSequence viterbi_decode(const graph::MultilayerGraph &g,
                               const std::vector<std::vector<Candidate>> &steps,
                               TransitionScorer &scorer) {
  const size_t T = steps.size();
  if (T == 0) throw std::invalid_argument("no observation steps");
  for (size_t t = 0; t < T; ++t) {
    if (steps[t].empty()) {
      throw std::runtime_error("no candidate states at step " +
                               std::to_string(t));
    }
  }

  // Candidates are visited in ascending node-id order with strict-greater
  // updates, so the smaller id wins every tied max.
  std::vector<std::vector<size_t>> id_order(T);
  for (size_t t = 0; t < T; ++t) {
    id_order[t].resize(steps[t].size());
    for (size_t i = 0; i < steps[t].size(); ++i) id_order[t][i] = i;
    std::sort(id_order[t].begin(), id_order[t].end(), [&](size_t a, size_t b) {
      return g.node(steps[t][a].node).id < g.node(steps[t][b].node).id;
    });
  }

  std::vector<double> prev(steps[0].size());
  for (size_t i = 0; i < steps[0].size(); ++i) {
    prev[i] = std::log(steps[0][i].emission);
  }
  std::vector<std::vector<size_t>> parent(T);

  for (size_t t = 1; t < T; ++t) {
    const auto &cur_states = steps[t];
    std::vector<double> cur(cur_states.size(), -kInf);
    parent[t].assign(cur_states.size(), size_t(-1));
    bool any_alive = false;
    for (size_t j = 0; j < cur_states.size(); ++j) {
      double best = -kInf;
      size_t best_i = size_t(-1);
      for (const size_t i : id_order[t - 1]) {
        if (prev[i] == -kInf) continue;
        const double v =
            prev[i] + scorer.log_score(steps[t - 1][i].node, cur_states[j].node);
        if (v > best) {
          best = v;
          best_i = i;
        }
      }
      if (best_i == size_t(-1)) continue;
      cur[j] = best + std::log(cur_states[j].emission);
      parent[t][j] = best_i;
      if (cur[j] != -kInf) any_alive = true;
    }
    if (!any_alive) {
      throw std::runtime_error("all states have zero likelihood at step " +
                               std::to_string(t) +
                               "; consider raising tau");
    }
    prev = std::move(cur);
  }

  double best = -kInf;
  size_t best_j = size_t(-1);
  for (const size_t j : id_order[T - 1]) {
    if (prev[j] > best) {
      best = prev[j];
      best_j = j;
    }
  }
  if (best_j == size_t(-1)) {
    throw std::runtime_error("all states have zero likelihood at step " +
                             std::to_string(T - 1));
  }

  DecodedSequence out;
  out.log_score = best;
  out.nodes.resize(T);
  size_t j = best_j;
  for (size_t t = T; t-- > 0;) {
    out.nodes[t] = steps[t][j].node;
    if (t > 0) j = parent[t][j];
  }
  return out;
}

SkeletonPath viterbi_skeleton(const graph::MultilayerGraph &g,
                              const cell_net::CellularNetwork &net,
                              const CellularTrajectory &traj,
                              const MapperParams &params,
                              TransitionModel model) {
  validate_trajectory(traj);
  std::vector<std::vector<Candidate>> steps(traj.observations.size());
  std::vector<std::string> notes;
  for (size_t t = 0; t < traj.observations.size(); ++t) {
    bool fellback = false;
    steps[t] = candidate_states(g, net, traj.observations[t], params, &fellback);
    if (fellback) {
      notes.push_back("observation " + std::to_string(t) + " (tower " +
                      traj.observations[t].tower_id +
                      "): no node within tau, using nearest node " +
                      g.node(steps[t][0].node).id);
    }
  }
  TransitionScorer scorer(g, params, model);
  DecodedSequence decoded = viterbi_decode(g, steps, scorer);

  SkeletonPath out;
  out.trajectory_id = traj.trajectory_id;
  out.nodes = std::move(decoded.nodes);
  out.log_score = decoded.log_score;
  out.notes = std::move(notes);
  return out;
}

CompletePath complete_path(const graph::MultilayerGraph &g,
                           const SkeletonPath &skeleton,
                           const MapperParams &params) {
  (void)params;
  if (skeleton.nodes.empty()) {
    throw std::invalid_argument("empty skeleton");
  }
  CompletePath out;
  out.trajectory_id = skeleton.trajectory_id;
  out.log_score = skeleton.log_score;
  out.notes = skeleton.notes;
  out.nodes.push_back(skeleton.nodes.front());
  out.skeleton_indices.push_back(0);

  for (size_t k = 1; k < skeleton.nodes.size(); ++k) {
    const graph::NodeIndex prev = out.nodes.back();
    const graph::NodeIndex next = skeleton.nodes[k];
    if (next == prev) {
      out.skeleton_indices.push_back(out.nodes.size() - 1);
      continue;
    }
    if (!g.has_edge(prev, next)) {
      const auto sp =
          graph::shortest_path(g, prev, next, graph::CostModel::Weighted);
      if (!sp) {
        out.failed = true;
        out.failure_reason = "no path between skeleton nodes " +
                             g.node(prev).id + " and " + g.node(next).id;
        return out;
      }
      for (size_t m = 1; m + 1 < sp->path.size(); ++m) {
        out.nodes.push_back(sp->path[m]);
      }
    }
    out.nodes.push_back(next);
    out.skeleton_indices.push_back(out.nodes.size() - 1);
  }
  return out;
}

CompletePath baseline1_map(const graph::MultilayerGraph &g,
                           const cell_net::CellularNetwork &net,
                           const CellularTrajectory &traj,
                           const MapperParams &params) {
  validate_trajectory(traj);
  SkeletonPath skeleton;
  skeleton.trajectory_id = traj.trajectory_id;
  skeleton.nodes.reserve(traj.observations.size());
  for (const Observation &obs : traj.observations) {
    const cell_net::CellTower &tower = net.tower(net.index_of(obs.tower_id));
    skeleton.nodes.push_back(g.nearest_node(tower.pos));
  }
  return complete_path(g, skeleton, params);
}

CompletePath map_trajectory(const graph::MultilayerGraph &g,
                            const cell_net::CellularNetwork &net,
                            const CellularTrajectory &traj,
                            const MapperParams &params, Algorithm algorithm) {
  try {
    if (algorithm == Algorithm::Baseline1) {
      return baseline1_map(g, net, traj, params);
    }
    const TransitionModel model = algorithm == Algorithm::CtMapper
                                      ? TransitionModel::CtMapper
                                      : TransitionModel::Baseline2;
    const SkeletonPath skeleton =
        viterbi_skeleton(g, net, traj, params, model);
    return complete_path(g, skeleton, params);
  } catch (const std::runtime_error &err) {
    CompletePath failed;
    failed.trajectory_id = traj.trajectory_id;
    failed.failed = true;
    failed.failure_reason = err.what();
    return failed;
  }
}

}  // namespace ctmap::mapper
