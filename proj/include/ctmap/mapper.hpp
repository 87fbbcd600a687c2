/**
 * HMM mapper for sparse cellular trajectories.
 *
 * Phase I scores candidate graph nodes per observation (emission: inverse
 * power decay beyond the antenna's Voronoi radius) and decodes the most
 * plausible node sequence with Viterbi over transition scores defined as
 * the inverse travel-time shortest-path cost. Phase II completes the
 * skeleton into a connected path by inserting least-cost interiors between
 * consecutive skeleton nodes.
 *
 * Scores are unnormalized and the decode runs in log domain; only argmax
 * matters. Tie rule everywhere: at every max the smaller node id wins,
 * which makes outputs deterministic and lets an exhaustive oracle
 * reproduce the exact sequence.
 */

#ifndef CTMAP_MAPPER_HPP
#define CTMAP_MAPPER_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctmap/cell_net.hpp"
#include "ctmap/graph.hpp"

namespace ctmap::mapper {

struct Observation {
  int64_t timestamp = 0;  // seconds since epoch
  std::string tower_id;
};

struct CellularTrajectory {
  std::string trajectory_id;
  std::vector<Observation> observations;  // timestamps strictly increasing
};

enum class SelfCostMode { HalfMinEdge, FixedEpsilon };
enum class TransitionModel { CtMapper, Baseline2 };
enum class Algorithm { CtMapper, Baseline1, Baseline2 };

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);
SelfCostMode parse_self_cost_mode(std::string_view name);
std::string self_cost_mode_name(SelfCostMode m);

struct MapperParams {
  double tau_km = 5.0;  // max distance an antenna can serve
  double beta = 2.0;    // emission decay exponent
  int max_candidates = 30;
  SelfCostMode self_cost_mode = SelfCostMode::HalfMinEdge;
  double self_cost_epsilon_hours = 0.01;  // used by FixedEpsilon mode
  double crosslayer_radius_km = 0.2;
  // Emission assigned to the fallback candidate when no node lies within
  // tau of the antenna; keeps the decode alive on isolated observations.
  double fallback_emission = 1e-12;
};

struct Candidate {
  graph::NodeIndex node = graph::kInvalidNode;
  double emission = 0.0;
  double distance_km = 0.0;
};

struct SkeletonPath {
  std::string trajectory_id;
  std::vector<graph::NodeIndex> nodes;  // one per observation
  double log_score = 0.0;
  std::vector<std::string> notes;  // fallback events and similar
};

struct CompletePath {
  std::string trajectory_id;
  std::vector<graph::NodeIndex> nodes;
  // Position of each skeleton node inside `nodes`; repeated skeleton nodes
  // collapse onto the same position, so the list is non-decreasing.
  std::vector<size_t> skeleton_indices;
  double log_score = 0.0;
  bool failed = false;
  std::string failure_reason;
  std::vector<std::string> notes;
};

/// Emission: 1 inside r_max, decaying as (r_max/d)^beta out to tau, 0 beyond.
double emission_score(const cell_net::CellTower &tower,
                      const geo::LatLon &node_pos, const MapperParams &params);

/**
 * Candidate nodes for one observation: every node with positive emission,
 * ranked by emission descending (ties by distance, then id), truncated to
 * max_candidates. Falls back to the single nearest node with the floor
 * emission when nothing lies within tau; fallback_used reports that.
 */
std::vector<Candidate> candidate_states(const graph::MultilayerGraph &g,
                                        const cell_net::CellularNetwork &net,
                                        const Observation &obs,
                                        const MapperParams &params,
                                        bool *fallback_used = nullptr);

/// Inverse shortest-path-cost transition. Self transitions cost half the
/// cheapest incident edge (or a fixed epsilon). Unreachable pairs score 0.
double transition_score(const graph::MultilayerGraph &g, graph::NodeIndex vi,
                        graph::NodeIndex vj, const MapperParams &params);

/// Degree-product transition of the topological baseline: 1/(k_i * prod of
/// interior degrees along the hop-count shortest path), 1/k_i on self
/// transitions, 0 when unreachable.
double baseline2_transition_score(const graph::MultilayerGraph &g,
                                  graph::NodeIndex vi, graph::NodeIndex vj);

/**
 * Per-trajectory memo of transition log-scores. Both the Viterbi decoder
 * and the exhaustive oracle must score through the same instance so their
 * floating-point results are bit-identical.
 */
class TransitionScorer {
 public:
  TransitionScorer(const graph::MultilayerGraph &g, const MapperParams &params,
                   TransitionModel model);

  /// log transition score; -inf when unreachable.
  double log_score(graph::NodeIndex from, graph::NodeIndex to);

  TransitionModel model() const { return model_; }

 private:
  const std::vector<double> &costs_from(graph::NodeIndex src);
  const std::vector<double> &hops_from(graph::NodeIndex src);
  double self_log_score(graph::NodeIndex v);
  double baseline2_log(graph::NodeIndex from, graph::NodeIndex to);

  const graph::MultilayerGraph &g_;
  MapperParams params_;
  TransitionModel model_;
  std::unordered_map<graph::NodeIndex, std::vector<double>> cost_cache_;
  std::unordered_map<graph::NodeIndex, std::vector<double>> hop_cache_;
  std::unordered_map<uint64_t, double> pair_cache_;
};

struct DecodedSequence {
  std::vector<graph::NodeIndex> nodes;
  double log_score = 0.0;
};

/**
 * Core log-domain Viterbi over explicit per-step candidate sets.
 * Initialization is the emission alone; recursion adds the best
 * predecessor score plus transition, accumulating strictly left to right
 * so an exhaustive rescoring of the result reproduces the exact value.
 * Throws when every state of some step scores -inf (message carries the
 * step index).
 */
DecodedSequence viterbi_decode(const graph::MultilayerGraph &g,
                               const std::vector<std::vector<Candidate>> &steps,
                               TransitionScorer &scorer);

/// Phase I: candidate selection per observation followed by viterbi_decode.
SkeletonPath viterbi_skeleton(const graph::MultilayerGraph &g,
                              const cell_net::CellularNetwork &net,
                              const CellularTrajectory &traj,
                              const MapperParams &params,
                              TransitionModel model);

/**
 * Phase II: inserts the interior of the least-cost path between every
 * consecutive non-adjacent skeleton pair; repeated nodes collapse. An
 * unreachable pair flags the result failed instead of throwing.
 */
CompletePath complete_path(const graph::MultilayerGraph &g,
                           const SkeletonPath &skeleton,
                           const MapperParams &params);

/// Nearest-node snap baseline: skeleton is the closest graph node to each
/// observation's antenna, completion as in complete_path.
CompletePath baseline1_map(const graph::MultilayerGraph &g,
                           const cell_net::CellularNetwork &net,
                           const CellularTrajectory &traj,
                           const MapperParams &params);

/// Full pipeline for one trajectory under the chosen algorithm. Never
/// throws on decode failures; they come back as failed results.
CompletePath map_trajectory(const graph::MultilayerGraph &g,
                            const cell_net::CellularNetwork &net,
                            const CellularTrajectory &traj,
                            const MapperParams &params, Algorithm algorithm);

}  // namespace ctmap::mapper

#endif  // CTMAP_MAPPER_HPP
