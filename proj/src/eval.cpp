#include "ctmap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "ctmap/parallel.hpp"

namespace ctmap::eval {

namespace {

double node_dist(const graph::MultilayerGraph &g, graph::NodeIndex a,
                 graph::NodeIndex b) {
  if (a == b) return 0.0;
  return geo::distance_km(g.node(a).pos, g.node(b).pos);
}

std::vector<graph::NodeIndex> dedup(const std::vector<graph::NodeIndex> &seq) {
  std::vector<graph::NodeIndex> out(seq);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Greedy one-to-one matching between two node sets: candidate pairs within
// epsilon, taken by ascending (distance, pred id, truth id).
size_t greedy_matches(const graph::MultilayerGraph &g,
                      const std::vector<graph::NodeIndex> &pred_set,
                      const std::vector<graph::NodeIndex> &truth_set,
                      double epsilon_km) {
  struct Pair {
    double d;
    graph::NodeIndex p, t;
  };
  std::vector<Pair> pairs;
  for (const graph::NodeIndex p : pred_set) {
    for (const graph::NodeIndex t : truth_set) {
      const double d = node_dist(g, p, t);
      if (d <= epsilon_km) pairs.push_back({d, p, t});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&g](const Pair &a, const Pair &b) {
    if (a.d != b.d) return a.d < b.d;
    const auto ka = std::tie(g.node(a.p).id, g.node(a.t).id);
    const auto kb = std::tie(g.node(b.p).id, g.node(b.t).id);
    return ka < kb;
  });
  std::set<graph::NodeIndex> used_p, used_t;
  size_t matched = 0;
  for (const Pair &pr : pairs) {
    if (used_p.count(pr.p) || used_t.count(pr.t)) continue;
    used_p.insert(pr.p);
    used_t.insert(pr.t);
    ++matched;
  }
  return matched;
}

}  // namespace

GroundTruth snap_gps_truth(const graph::MultilayerGraph &g,
                           const GroundTruth &truth, double gate_km,
                           size_t *dropped) {
  if (dropped) *dropped = 0;
  GroundTruth out;
  out.trajectory_id = truth.trajectory_id;
  if (!truth.nodes.empty()) {
    out.nodes = truth.nodes;
    return out;
  }
  for (const geo::LatLon &p : truth.gps_points) {
    const graph::NodeIndex v = g.nearest_node(p);
    if (v == graph::kInvalidNode ||
        geo::distance_km(p, g.node(v).pos) > gate_km) {
      if (dropped) ++*dropped;
      continue;
    }
    if (out.nodes.empty() || out.nodes.back() != v) out.nodes.push_back(v);
  }
  return out;
}

double truth_length_km(const graph::MultilayerGraph &g,
                       const GroundTruth &truth) {
  double total = 0.0;
  if (!truth.nodes.empty()) {
    for (size_t i = 1; i < truth.nodes.size(); ++i) {
      total += node_dist(g, truth.nodes[i - 1], truth.nodes[i]);
    }
  } else {
    for (size_t i = 1; i < truth.gps_points.size(); ++i) {
      total += geo::distance_km(truth.gps_points[i - 1], truth.gps_points[i]);
    }
  }
  return total;
}

bool node_match(const graph::MultilayerGraph &g, graph::NodeIndex a,
                graph::NodeIndex b, double epsilon_km) {
  return node_dist(g, a, b) <= epsilon_km;
}

double edit_similarity(const graph::MultilayerGraph &g,
                       const std::vector<graph::NodeIndex> &pred,
                       const std::vector<graph::NodeIndex> &truth,
                       double epsilon_km) {
  if (pred.empty() || truth.empty()) {
    throw std::invalid_argument("edit_similarity: empty sequence");
  }
  const size_t n = pred.size(), m = truth.size();
  std::vector<size_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = j;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= m; ++j) {
      const size_t sub =
          node_match(g, pred[i - 1], truth[j - 1], epsilon_km) ? 0 : 1;
      cur[j] = std::min({prev[j - 1] + sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  const double dist = double(prev[m]);
  return 1.0 - dist / double(std::max(n, m));
}

PrecisionRecall precision_recall(const graph::MultilayerGraph &g,
                                 const std::vector<graph::NodeIndex> &pred,
                                 const std::vector<graph::NodeIndex> &truth,
                                 double epsilon_km) {
  if (truth.empty()) {
    throw std::invalid_argument("precision_recall: empty truth");
  }
  PrecisionRecall out;
  const std::vector<graph::NodeIndex> pred_set = dedup(pred);
  const std::vector<graph::NodeIndex> truth_set = dedup(truth);
  if (pred_set.empty()) {
    out.empty_pred = true;
    return out;
  }
  const size_t matched = greedy_matches(g, pred_set, truth_set, epsilon_km);
  out.precision = double(matched) / double(pred_set.size());
  out.recall = double(matched) / double(truth_set.size());
  return out;
}

double edit_distance_km(const graph::MultilayerGraph &g,
                        const std::vector<graph::NodeIndex> &pred,
                        const std::vector<graph::NodeIndex> &truth) {
  if (pred.empty() || truth.empty()) {
    throw std::invalid_argument("edit_distance_km: empty sequence");
  }
  const size_t n = pred.size(), m = truth.size();

  // Cost of removing pred node p while aligned between truth positions
  // j-1 and j: distance to the nearer existing neighbor.
  auto del_cost = [&](size_t i, size_t j) {
    const graph::NodeIndex p = pred[i - 1];
    double best = std::numeric_limits<double>::infinity();
    if (j >= 1) best = std::min(best, node_dist(g, p, truth[j - 1]));
    if (j < m) best = std::min(best, node_dist(g, p, truth[j]));
    return best;
  };
  auto ins_cost = [&](size_t i, size_t j) {
    const graph::NodeIndex t = truth[j - 1];
    double best = std::numeric_limits<double>::infinity();
    if (i >= 1) best = std::min(best, node_dist(g, t, pred[i - 1]));
    if (i < n) best = std::min(best, node_dist(g, t, pred[i]));
    return best;
  };

  std::vector<std::vector<double>> D(n + 1, std::vector<double>(m + 1, 0.0));
  for (size_t i = 1; i <= n; ++i) D[i][0] = D[i - 1][0] + del_cost(i, 0);
  for (size_t j = 1; j <= m; ++j) D[0][j] = D[0][j - 1] + ins_cost(0, j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const double sub = D[i - 1][j - 1] + node_dist(g, pred[i - 1], truth[j - 1]);
      const double del = D[i - 1][j] + del_cost(i, j);
      const double ins = D[i][j - 1] + ins_cost(i, j);
      D[i][j] = std::min({sub, del, ins});
    }
  }
  return D[n][m];
}

double rmse_km(const graph::MultilayerGraph &g,
               const std::vector<graph::NodeIndex> &pred,
               const std::vector<graph::NodeIndex> &truth) {
  if (pred.empty() || truth.empty()) {
    throw std::invalid_argument("rmse_km: empty sequence");
  }
  double sum_sq = 0.0;
  for (const graph::NodeIndex p : pred) {
    double best = std::numeric_limits<double>::infinity();
    for (const graph::NodeIndex t : truth) {
      best = std::min(best, node_dist(g, p, t));
    }
    sum_sq += best * best;
  }
  return std::sqrt(sum_sq / double(pred.size()));
}

LayerMetrics layer_metrics(const graph::MultilayerGraph &g,
                           const std::vector<graph::NodeIndex> &pred,
                           const std::vector<graph::NodeIndex> &truth,
                           double epsilon_km) {
  LayerMetrics out;
  double prec_weighted = 0.0, rec_weighted = 0.0;
  size_t prec_weight = 0, rec_weight = 0;
  for (const graph::Layer layer :
       {graph::Layer::Road, graph::Layer::Metro, graph::Layer::Train}) {
    std::vector<graph::NodeIndex> pred_l, truth_l;
    for (const graph::NodeIndex v : dedup(pred)) {
      if (g.node(v).layer == layer) pred_l.push_back(v);
    }
    for (const graph::NodeIndex v : dedup(truth)) {
      if (g.node(v).layer == layer) truth_l.push_back(v);
    }
    LayerMetric metric;
    metric.pred_nodes = pred_l.size();
    metric.truth_nodes = truth_l.size();
    metric.present = !pred_l.empty() || !truth_l.empty();
    if (!metric.present) {
      out.per_layer[graph::layer_name(layer)] = metric;
      continue;
    }
    const size_t matched =
        (pred_l.empty() || truth_l.empty())
            ? 0
            : greedy_matches(g, pred_l, truth_l, epsilon_km);
    if (pred_l.empty()) {
      metric.empty_pred = true;
    } else {
      metric.precision = double(matched) / double(pred_l.size());
      prec_weighted += metric.precision * double(pred_l.size());
      prec_weight += pred_l.size();
    }
    if (!truth_l.empty()) {
      metric.recall = double(matched) / double(truth_l.size());
      rec_weighted += metric.recall * double(truth_l.size());
      rec_weight += truth_l.size();
    }
    out.per_layer[graph::layer_name(layer)] = metric;
  }
  out.overall_precision = prec_weight ? prec_weighted / double(prec_weight) : 0.0;
  out.overall_recall = rec_weight ? rec_weighted / double(rec_weight) : 0.0;
  return out;
}

FilterReport filter_corpus(const graph::MultilayerGraph &g,
                           const cell_net::CellularNetwork &network,
                           std::vector<mapper::CellularTrajectory> &trajectories,
                           std::vector<GroundTruth> &truths, double min_km,
                           double q) {
  FilterReport report;
  report.min_km = min_km;
  report.x_th = neighbor_distance_quantile(network, q);
  report.threshold = std::max(min_km, report.x_th);

  std::set<std::string> dropped;
  for (const GroundTruth &truth : truths) {
    if (truth_length_km(g, truth) < report.threshold) {
      dropped.insert(truth.trajectory_id);
    }
  }
  std::erase_if(truths, [&](const GroundTruth &t) {
    return dropped.count(t.trajectory_id) > 0;
  });
  std::erase_if(trajectories, [&](const mapper::CellularTrajectory &t) {
    return dropped.count(t.trajectory_id) > 0;
  });
  report.dropped_ids.assign(dropped.begin(), dropped.end());
  return report;
}

std::vector<double> default_epsilon_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(double(i) / 10.0);
  return grid;
}

EvalReport evaluate_corpus(const graph::MultilayerGraph &g,
                           const std::vector<mapper::CompletePath> &preds,
                           const std::vector<GroundTruth> &truths,
                           const std::vector<double> &epsilon_grid,
                           unsigned jobs) {
  if (epsilon_grid.empty()) {
    throw std::invalid_argument("epsilon grid must not be empty");
  }
  EvalReport report;
  report.epsilon_grid = epsilon_grid;

  std::unordered_map<std::string, const mapper::CompletePath *> pred_by_id;
  for (const auto &p : preds) pred_by_id.emplace(p.trajectory_id, &p);
  std::unordered_map<std::string, const GroundTruth *> truth_by_id;
  for (const auto &t : truths) truth_by_id.emplace(t.trajectory_id, &t);

  std::set<std::string> all_ids;
  for (const auto &p : preds) all_ids.insert(p.trajectory_id);
  for (const auto &t : truths) all_ids.insert(t.trajectory_id);
  const std::vector<std::string> ids(all_ids.begin(), all_ids.end());

  report.trajectories.resize(ids.size());
  par::parallel_for(ids.size(), jobs, [&](size_t idx) {
    const std::string &id = ids[idx];
    TrajectoryEval &row = report.trajectories[idx];
    row.trajectory_id = id;

    const auto pit = pred_by_id.find(id);
    const auto tit = truth_by_id.find(id);
    if (pit == pred_by_id.end()) {
      row.failed = true;
      row.error = "no prediction for this trajectory";
      return;
    }
    if (tit == truth_by_id.end()) {
      row.failed = true;
      row.error = "no ground truth for this trajectory";
      return;
    }
    const mapper::CompletePath &pred = *pit->second;
    const GroundTruth &truth = *tit->second;
    if (pred.failed) {
      row.failed = true;
      row.error = pred.failure_reason.empty() ? "mapping failed"
                                              : pred.failure_reason;
      return;
    }
    if (pred.nodes.empty() || truth.nodes.empty()) {
      row.failed = true;
      row.error = pred.nodes.empty() ? "empty prediction" : "empty ground truth";
      return;
    }

    std::vector<graph::NodeIndex> skeleton;
    skeleton.reserve(pred.skeleton_indices.size());
    for (const size_t si : pred.skeleton_indices) {
      skeleton.push_back(pred.nodes[si]);
    }
    if (skeleton.empty()) skeleton = pred.nodes;

    for (const double eps : epsilon_grid) {
      row.skeleton_similarity.push_back(
          edit_similarity(g, skeleton, truth.nodes, eps));
      row.complete_similarity.push_back(
          edit_similarity(g, pred.nodes, truth.nodes, eps));
      const PrecisionRecall pr =
          precision_recall(g, pred.nodes, truth.nodes, eps);
      row.precision.push_back(pr.precision);
      row.recall.push_back(pr.recall);
      row.empty_pred = row.empty_pred || pr.empty_pred;
      const LayerMetrics lm = layer_metrics(g, pred.nodes, truth.nodes, eps);
      row.layer_precision.push_back(lm.overall_precision);
      row.layer_recall.push_back(lm.overall_recall);
    }
    row.rmse_km = rmse_km(g, pred.nodes, truth.nodes);
    row.edit_km = edit_distance_km(g, pred.nodes, truth.nodes);
  });

  const size_t k = epsilon_grid.size();
  report.mean_skeleton_similarity.assign(k, 0.0);
  report.mean_complete_similarity.assign(k, 0.0);
  report.mean_precision.assign(k, 0.0);
  report.mean_recall.assign(k, 0.0);
  report.mean_layer_precision.assign(k, 0.0);
  report.mean_layer_recall.assign(k, 0.0);
  for (const TrajectoryEval &row : report.trajectories) {
    if (row.failed) {
      ++report.failed;
      continue;
    }
    ++report.evaluated;
    for (size_t e = 0; e < k; ++e) {
      report.mean_skeleton_similarity[e] += row.skeleton_similarity[e];
      report.mean_complete_similarity[e] += row.complete_similarity[e];
      report.mean_precision[e] += row.precision[e];
      report.mean_recall[e] += row.recall[e];
      report.mean_layer_precision[e] += row.layer_precision[e];
      report.mean_layer_recall[e] += row.layer_recall[e];
    }
    report.mean_rmse_km += row.rmse_km;
    report.mean_edit_km += row.edit_km;
  }
  if (report.evaluated > 0) {
    const double inv = 1.0 / double(report.evaluated);
    for (size_t e = 0; e < k; ++e) {
      report.mean_skeleton_similarity[e] *= inv;
      report.mean_complete_similarity[e] *= inv;
      report.mean_precision[e] *= inv;
      report.mean_recall[e] *= inv;
      report.mean_layer_precision[e] *= inv;
      report.mean_layer_recall[e] *= inv;
    }
    report.mean_rmse_km *= inv;
    report.mean_edit_km *= inv;
  }
  return report;
}

}  // namespace ctmap::eval
