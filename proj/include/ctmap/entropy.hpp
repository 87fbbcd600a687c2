/**
 * Search-information entropy.
 *
 * S(s,t) = -log2 of the probability that a degree-guided random walker,
 * choosing uniformly among the remaining edges at every interior node,
 * follows one of the shortest paths from s to t. Shortest means hop-count
 * here: the walker argument is purely topological. S_avg averages S over
 * ordered node pairs, exactly when the pair count fits the budget and by
 * seeded sampling otherwise, and is compared against a degree-preserving
 * randomized counterpart.
 */

#ifndef CTMAP_ENTROPY_HPP
#define CTMAP_ENTROPY_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ctmap/graph.hpp"

namespace ctmap::entropy {

inline constexpr double kUnsetEntropy =
    std::numeric_limits<double>::quiet_NaN();

struct EntropyReport {
  double S_avg = 0.0;          // bits
  double sigma = 0.0;          // S_avg / log2(N)
  double S_R = kUnsetEntropy;  // randomized counterpart
  double delta = kUnsetEntropy;  // (S_avg - S_R) / log2(N)
  size_t N = 0;
  size_t pairs_evaluated = 0;   // reachable pairs that entered the mean
  size_t unreachable_pairs = 0;
  uint64_t sampling_seed = 0;
  bool exact = false;  // true when every ordered pair was evaluated
};

/**
 * Probability that the walker follows exactly this path: 1/k_s at the
 * source, then 1/(k_j - 1) at every interior node. The endpoints contribute
 * no interior factor. Throws on non-adjacent consecutive nodes, paths
 * shorter than 2 nodes, or a degree-1 interior node (impossible on a real
 * shortest path, so it marks malformed input).
 */
double path_probability(const graph::MultilayerGraph &g,
                        const std::vector<graph::NodeIndex> &path);

/**
 * -log2 of the summed walker probability over ALL hop-count shortest paths
 * s -> t, evaluated by dynamic programming over the BFS shortest-path DAG
 * (no path enumeration). Empty when t is unreachable from s.
 */
std::optional<double> pair_search_information(const graph::MultilayerGraph &g,
                                              graph::NodeIndex s,
                                              graph::NodeIndex t);

struct SamplingPlan {
  size_t pair_budget = 200000;
  uint64_t seed = 0;
  unsigned jobs = 1;
};

/// One evaluated reachable pair, for plot exports.
struct PairSample {
  graph::NodeIndex s = graph::kInvalidNode;
  graph::NodeIndex t = graph::kInvalidNode;
  double bits = 0.0;
};

/// S_avg over ordered pairs: exact when N(N-1) <= budget, sampled otherwise.
/// Unreachable pairs are excluded from the mean and counted. S_R and delta
/// are left NaN. When `samples` is given it receives every reachable pair
/// that entered the mean (exact mode in ascending (s, t) order, sampled
/// mode in draw order).
EntropyReport search_entropy(const graph::MultilayerGraph &g,
                             const SamplingPlan &plan,
                             std::vector<PairSample> *samples = nullptr);

/// Same, then computes S_R on a degree-preserving rewiring of g (same
/// sampling plan) and fills S_R and delta. Samples cover the input graph,
/// not the rewired one.
EntropyReport search_entropy_with_baseline(const graph::MultilayerGraph &g,
                                           const SamplingPlan &plan,
                                           size_t swap_factor = 10,
                                           std::vector<PairSample> *samples = nullptr);

/**
 * Degree-preserving randomization: swap_factor * |E| attempted double-edge
 * swaps, rejecting self-loops and duplicate edges. Nodes keep ids,
 * positions and layer tags; rewired edges all get class road_local (the
 * walker never looks at classes or weights).
 */
graph::MultilayerGraph randomize_preserving_degrees(
    const graph::MultilayerGraph &g, size_t swap_factor, uint64_t seed);

}  // namespace ctmap::entropy

#endif  // CTMAP_ENTROPY_HPP
