/**
 * Evaluation of mapped paths against ground truth.
 *
 * Match-based metrics (edit similarity, precision/recall, per-layer rates)
 * take a radius epsilon: two nodes match when they lie within epsilon km
 * of each other. Distance-weighted metrics (edit distance in km, RMSE) are
 * parameter-free. Corpus evaluation runs every metric over an epsilon grid
 * and aggregates means.
 */

#ifndef CTMAP_EVAL_HPP
#define CTMAP_EVAL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctmap/cell_net.hpp"
#include "ctmap/graph.hpp"
#include "ctmap/mapper.hpp"

namespace ctmap::eval {

struct GroundTruth {
  std::string trajectory_id;
  std::vector<graph::NodeIndex> nodes;  // empty while still GPS-based
  std::vector<geo::LatLon> gps_points;  // time-ordered, empty if nodes given
};

/// Snaps a GPS-based truth to graph nodes: nearest node per point, points
/// farther than gate_km from any node are dropped and counted; consecutive
/// duplicates collapse.
GroundTruth snap_gps_truth(const graph::MultilayerGraph &g,
                           const GroundTruth &truth, double gate_km = 0.1,
                           size_t *dropped = nullptr);

/// Polyline length of a truth path in km (geodesic between consecutive
/// node positions).
double truth_length_km(const graph::MultilayerGraph &g,
                       const GroundTruth &truth);

bool node_match(const graph::MultilayerGraph &g, graph::NodeIndex a,
                graph::NodeIndex b, double epsilon_km);

/// Unit-cost Levenshtein over the epsilon match predicate, reported as
/// 1 - distance / max(|pred|, |truth|).
double edit_similarity(const graph::MultilayerGraph &g,
                       const std::vector<graph::NodeIndex> &pred,
                       const std::vector<graph::NodeIndex> &truth,
                       double epsilon_km);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  bool empty_pred = false;  // precision had an empty denominator
};

/// Greedy one-to-one matching by ascending distance between the deduplicated
/// node sets; a truth node can back at most one prediction.
PrecisionRecall precision_recall(const graph::MultilayerGraph &g,
                                 const std::vector<graph::NodeIndex> &pred,
                                 const std::vector<graph::NodeIndex> &truth,
                                 double epsilon_km);

/**
 * Edit distance in km: substitution costs the distance between the two
 * nodes; inserting or deleting a node costs its distance to the nearer of
 * the two alignment positions it falls between in the other sequence.
 */
double edit_distance_km(const graph::MultilayerGraph &g,
                        const std::vector<graph::NodeIndex> &pred,
                        const std::vector<graph::NodeIndex> &truth);

/// RMSE of each predicted node's distance to its nearest truth node.
double rmse_km(const graph::MultilayerGraph &g,
               const std::vector<graph::NodeIndex> &pred,
               const std::vector<graph::NodeIndex> &truth);

struct LayerMetric {
  double precision = 0.0;
  double recall = 0.0;
  size_t pred_nodes = 0;
  size_t truth_nodes = 0;
  bool present = false;    // layer appears in pred or truth
  bool empty_pred = false;
};

struct LayerMetrics {
  std::map<std::string, LayerMetric> per_layer;  // keyed by layer name
  double overall_precision = 0.0;  // node-count-weighted across layers
  double overall_recall = 0.0;
};

/// Layer detection rates: a pred node of layer L counts when it matches a
/// truth node of the same layer within epsilon; overall rates weight each
/// layer by its node count.
LayerMetrics layer_metrics(const graph::MultilayerGraph &g,
                           const std::vector<graph::NodeIndex> &pred,
                           const std::vector<graph::NodeIndex> &truth,
                           double epsilon_km = 0.2);

struct FilterReport {
  double min_km = 0.0;
  double x_th = 0.0;       // neighbor-distance quantile
  double threshold = 0.0;  // max(min_km, x_th)
  std::vector<std::string> dropped_ids;
};

/// Drops trajectories whose ground truth is shorter than
/// max(min_km, neighbor_distance_quantile(network, q)).
FilterReport filter_corpus(const graph::MultilayerGraph &g,
                           const cell_net::CellularNetwork &network,
                           std::vector<mapper::CellularTrajectory> &trajectories,
                           std::vector<GroundTruth> &truths,
                           double min_km = 5.0, double q = 0.97);

struct TrajectoryEval {
  std::string trajectory_id;
  bool failed = false;
  std::string error;
  // per-epsilon values, aligned with the report's epsilon grid
  std::vector<double> skeleton_similarity;
  std::vector<double> complete_similarity;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> layer_precision;
  std::vector<double> layer_recall;
  bool empty_pred = false;
  double rmse_km = 0.0;
  double edit_km = 0.0;
};

struct EvalReport {
  std::vector<double> epsilon_grid;
  std::vector<TrajectoryEval> trajectories;  // sorted by id
  // corpus means over non-failed trajectories, same grid alignment
  std::vector<double> mean_skeleton_similarity;
  std::vector<double> mean_complete_similarity;
  std::vector<double> mean_precision;
  std::vector<double> mean_recall;
  std::vector<double> mean_layer_precision;
  std::vector<double> mean_layer_recall;
  double mean_rmse_km = 0.0;
  double mean_edit_km = 0.0;
  size_t evaluated = 0;
  size_t failed = 0;
};

std::vector<double> default_epsilon_grid();  // 0.1 .. 1.0 km

/**
 * Runs every metric per trajectory and epsilon. Predictions and truths are
 * joined by trajectory id; ids present on one side only produce error rows
 * and the evaluation continues. Skeleton metrics use the prediction's
 * skeleton subsequence.
 */
EvalReport evaluate_corpus(const graph::MultilayerGraph &g,
                           const std::vector<mapper::CompletePath> &preds,
                           const std::vector<GroundTruth> &truths,
                           const std::vector<double> &epsilon_grid,
                           unsigned jobs = 1);

}  // namespace ctmap::eval

#endif  // CTMAP_EVAL_HPP
