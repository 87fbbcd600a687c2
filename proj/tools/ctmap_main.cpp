/**
 * ctmap command line tool.
 *
 * Subcommands: build-graph, entropy, map, evaluate, simulate. Every run
 * writes its outputs plus a manifest.json into --out-dir; given the same
 * inputs and flags a rerun reproduces every output byte for byte (no
 * wall-clock, no ambient randomness, sorted records everywhere).
 *
 * Exit codes: 0 success, 1 runtime failure, 2 usage error.
 */

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctmap/cell_net.hpp"
#include "ctmap/entropy.hpp"
#include "ctmap/eval.hpp"
#include "ctmap/geo.hpp"
#include "ctmap/graph.hpp"
#include "ctmap/io.hpp"
#include "ctmap/mapper.hpp"
#include "ctmap/parallel.hpp"
#include "ctmap/synth.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace ctmap;

namespace {

constexpr const char *kVersion = "0.1.0";

/// Command line or config mistakes; mapped to exit code 2.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ToolConfig {
  mapper::MapperParams mapper_params;
  synth::SynthConfig synth_config;
  cell_net::BuildOptions cell_options;
};

double config_double(const std::string &key, const std::string &value) {
  double v = 0.0;
  const char *begin = value.data();
  const char *end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw usage_error("config key " + key + ": invalid number `" + value +
                      "`");
  }
  return v;
}

int64_t config_int(const std::string &key, const std::string &value) {
  int64_t v = 0;
  const char *begin = value.data();
  const char *end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw usage_error("config key " + key + ": invalid integer `" + value +
                      "`");
  }
  return v;
}

std::string trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// key=value per line, `#` comments. Keys are prefixed with the struct they
/// override (mapper., synth., cell.) plus the global `distance`.
void apply_config_file(const fs::path &path, ToolConfig &cfg) {
  std::ifstream in(path);
  if (!in) {
    throw usage_error("cannot open config file " + path.string());
  }
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw usage_error(path.string() + ":" + std::to_string(line_no) +
                        ": expected key=value, got `" + t + "`");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "mapper.tau_km") {
        cfg.mapper_params.tau_km = config_double(key, value);
      } else if (key == "mapper.beta") {
        cfg.mapper_params.beta = config_double(key, value);
      } else if (key == "mapper.max_candidates") {
        cfg.mapper_params.max_candidates = int(config_int(key, value));
      } else if (key == "mapper.self_cost_mode") {
        cfg.mapper_params.self_cost_mode = mapper::parse_self_cost_mode(value);
      } else if (key == "mapper.self_cost_epsilon_hours") {
        cfg.mapper_params.self_cost_epsilon_hours = config_double(key, value);
      } else if (key == "mapper.crosslayer_radius_km") {
        cfg.mapper_params.crosslayer_radius_km = config_double(key, value);
      } else if (key == "mapper.fallback_emission") {
        cfg.mapper_params.fallback_emission = config_double(key, value);
      } else if (key == "synth.seed") {
        cfg.synth_config.seed = uint64_t(config_int(key, value));
      } else if (key == "synth.road_rows") {
        cfg.synth_config.road_rows = int(config_int(key, value));
      } else if (key == "synth.road_cols") {
        cfg.synth_config.road_cols = int(config_int(key, value));
      } else if (key == "synth.road_spacing_km") {
        cfg.synth_config.road_spacing_km = config_double(key, value);
      } else if (key == "synth.metro_lines") {
        cfg.synth_config.metro_lines = int(config_int(key, value));
      } else if (key == "synth.metro_station_spacing_km") {
        cfg.synth_config.metro_station_spacing_km = config_double(key, value);
      } else if (key == "synth.train_lines") {
        cfg.synth_config.train_lines = int(config_int(key, value));
      } else if (key == "synth.train_station_spacing_km") {
        cfg.synth_config.train_station_spacing_km = config_double(key, value);
      } else if (key == "synth.antenna_spacing_km") {
        cfg.synth_config.antenna_spacing_km = config_double(key, value);
      } else if (key == "synth.antenna_jitter_km") {
        cfg.synth_config.antenna_jitter_km = config_double(key, value);
      } else if (key == "synth.crosslayer_radius_km") {
        cfg.synth_config.crosslayer_radius_km = config_double(key, value);
      } else if (key == "synth.observation_interval_s") {
        cfg.synth_config.observation_interval_s = config_double(key, value);
      } else if (key == "synth.assignment_noise") {
        cfg.synth_config.assignment_noise = config_double(key, value);
      } else if (key == "synth.origin_lat") {
        cfg.synth_config.origin.lat = config_double(key, value);
      } else if (key == "synth.origin_lon") {
        cfg.synth_config.origin.lon = config_double(key, value);
      } else if (key == "synth.bbox_margin_km") {
        cfg.synth_config.bbox_margin_km = config_double(key, value);
      } else if (key == "cell.r_max_cap_km") {
        cfg.cell_options.r_max_cap_km = config_double(key, value);
      } else if (key == "distance") {
        geo::set_distance_mode(geo::parse_distance_mode(value));
      } else {
        throw usage_error(path.string() + ":" + std::to_string(line_no) +
                          ": unknown config key `" + key + "`");
      }
    } catch (const std::invalid_argument &e) {
      throw usage_error(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

ordered_json manifest_base(const std::string &subcommand) {
  ordered_json m;
  m["tool"] = "ctmap";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["parameters"] = ordered_json::object();
  m["inputs"] = ordered_json::object();
  m["outputs"] = ordered_json::array();
  return m;
}

void manifest_input(ordered_json &m, const std::string &name,
                    const fs::path &path) {
  ordered_json entry;
  entry["path"] = path.string();
  entry["digest"] = io::file_digest(path);
  m["inputs"][name] = entry;
}

void write_json(const ordered_json &j, const fs::path &path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

ordered_json entropy_report_json(const entropy::EntropyReport &r) {
  ordered_json j;
  j["S_avg"] = r.S_avg;
  j["sigma"] = r.sigma;
  j["S_R"] = r.S_R;      // NaN serializes as null until computed
  j["delta"] = r.delta;
  j["N"] = r.N;
  j["pairs_evaluated"] = r.pairs_evaluated;
  j["unreachable_pairs"] = r.unreachable_pairs;
  j["sampling_seed"] = r.sampling_seed;
  j["exact"] = r.exact;
  return j;
}

ordered_json mapper_params_json(const mapper::MapperParams &p) {
  ordered_json j;
  j["tau_km"] = p.tau_km;
  j["beta"] = p.beta;
  j["max_candidates"] = p.max_candidates;
  j["self_cost_mode"] = mapper::self_cost_mode_name(p.self_cost_mode);
  j["self_cost_epsilon_hours"] = p.self_cost_epsilon_hours;
  j["crosslayer_radius_km"] = p.crosslayer_radius_km;
  j["fallback_emission"] = p.fallback_emission;
  return j;
}

ordered_json synth_config_json(const synth::SynthConfig &c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["road_rows"] = c.road_rows;
  j["road_cols"] = c.road_cols;
  j["road_spacing_km"] = c.road_spacing_km;
  j["metro_lines"] = c.metro_lines;
  j["metro_station_spacing_km"] = c.metro_station_spacing_km;
  j["train_lines"] = c.train_lines;
  j["train_station_spacing_km"] = c.train_station_spacing_km;
  j["antenna_spacing_km"] = c.antenna_spacing_km;
  j["antenna_jitter_km"] = c.antenna_jitter_km;
  j["crosslayer_radius_km"] = c.crosslayer_radius_km;
  j["observation_interval_s"] = c.observation_interval_s;
  j["assignment_noise"] = c.assignment_noise;
  j["origin_lat"] = c.origin.lat;
  j["origin_lon"] = c.origin.lon;
  j["bbox_margin_km"] = c.bbox_margin_km;
  return j;
}

struct GlobalArgs {
  std::string config_path;
  unsigned jobs = 1;
  int64_t seed = -1;  // negative = not given
  std::string out_dir = ".";
};

// ---------------------------------------------------------------- build-graph

struct BuildGraphArgs {
  std::string nodes_path, edges_path;
  double connect_radius = 0.0;
  bool connect = false;
};

int cmd_build_graph(const GlobalArgs &global, const BuildGraphArgs &args) {
  graph::MultilayerGraph g =
      io::load_graph_files(args.nodes_path, args.edges_path);
  graph::ConnectLayersReport connect_report;
  if (args.connect) {
    connect_report = graph::connect_layers(g, args.connect_radius);
  }

  const fs::path out_dir(global.out_dir);
  fs::create_directories(out_dir);
  io::save_graph_files(g, out_dir / "nodes.csv", out_dir / "edges.csv");

  static constexpr graph::Layer kLayers[] = {
      graph::Layer::Road, graph::Layer::Metro, graph::Layer::Train};
  ordered_json layers = ordered_json::object();
  std::printf("%-12s %8s %8s %8s %8s\n", "Layer", "Node", "Edge", "Degree",
              "Length");
  for (const graph::Layer layer : kLayers) {
    const graph::LayerStats s = graph::layer_stats(g, layer);
    std::printf("%-12s %8zu %8zu %8.2f %8.3f\n",
                graph::layer_name(layer).c_str(), s.nodes, s.edges,
                s.mean_degree, s.mean_edge_length_km);
    ordered_json row;
    row["nodes"] = s.nodes;
    row["edges"] = s.edges;
    row["mean_degree"] = s.mean_degree;
    row["mean_edge_length_km"] = s.mean_edge_length_km;
    layers[graph::layer_name(layer)] = row;
  }
  const size_t crosslayer = graph::crosslayer_edge_count(g);
  std::printf("%-12s %8s %8zu %8s %8s\n", "crosslayer", "-", crosslayer, "-",
              "-");

  ordered_json summary;
  summary["layers"] = layers;
  summary["crosslayer_edges"] = crosslayer;
  summary["total_nodes"] = g.node_count();
  summary["total_edges"] = g.edge_count();
  summary["connected"] = g.connected();
  if (args.connect) {
    summary["connect_radius_km"] = args.connect_radius;
    summary["crosslayer_edges_added"] = connect_report.edges_added;
    summary["unconnected_stations"] = connect_report.unconnected_stations;
  }
  write_json(summary, out_dir / "summary.json");

  ordered_json m = manifest_base("build-graph");
  m["parameters"]["connect_radius_km"] =
      args.connect ? ordered_json(args.connect_radius) : ordered_json();
  m["parameters"]["distance"] =
      geo::distance_mode() == geo::DistanceMode::Haversine
          ? "haversine"
          : "equirectangular";
  manifest_input(m, "nodes", args.nodes_path);
  manifest_input(m, "edges", args.edges_path);
  m["outputs"] = {"nodes.csv", "edges.csv", "summary.json"};
  write_json(m, out_dir / "manifest.json");
  return 0;
}

// -------------------------------------------------------------------- entropy

struct EntropyArgs {
  std::string nodes_path, edges_path;
  std::string layer = "all";
  size_t budget = 200000;
  size_t swap_factor = 10;
};

int cmd_entropy(const GlobalArgs &global, const EntropyArgs &args) {
  const graph::MultilayerGraph full =
      io::load_graph_files(args.nodes_path, args.edges_path);
  const graph::MultilayerGraph scope =
      args.layer == "all" ? full
                          : full.layer_subgraph(graph::parse_layer(args.layer));

  entropy::SamplingPlan plan;
  plan.pair_budget = args.budget;
  plan.seed = global.seed >= 0 ? uint64_t(global.seed) : 0;
  plan.jobs = global.jobs;

  std::vector<entropy::PairSample> samples;
  const entropy::EntropyReport report =
      args.swap_factor > 0
          ? entropy::search_entropy_with_baseline(scope, plan,
                                                  args.swap_factor, &samples)
          : entropy::search_entropy(scope, plan, &samples);

  const fs::path out_dir(global.out_dir);
  fs::create_directories(out_dir);

  ordered_json j;
  j["scope"] = args.layer;
  j["report"] = entropy_report_json(report);
  if (args.layer == "all") {
    ordered_json breakdown = ordered_json::object();
    for (const graph::Layer layer :
         {graph::Layer::Road, graph::Layer::Metro, graph::Layer::Train}) {
      const graph::MultilayerGraph sub = full.layer_subgraph(layer);
      if (sub.node_count() == 0) continue;
      breakdown[graph::layer_name(layer)] =
          entropy_report_json(entropy::search_entropy(sub, plan));
    }
    j["layers"] = breakdown;
  }
  write_json(j, out_dir / "entropy.json");

  {
    std::ofstream out = open_out(out_dir / "pairs.csv");
    out << "src,dst,bits\n";
    for (const entropy::PairSample &s : samples) {
      out << scope.node(s.s).id << ',' << scope.node(s.t).id << ','
          << io::format_double(s.bits) << '\n';
    }
  }

  ordered_json m = manifest_base("entropy");
  m["parameters"]["layer"] = args.layer;
  m["parameters"]["budget"] = args.budget;
  m["parameters"]["swap_factor"] = args.swap_factor;
  m["parameters"]["seed"] = plan.seed;
  m["parameters"]["jobs"] = global.jobs;
  manifest_input(m, "nodes", args.nodes_path);
  manifest_input(m, "edges", args.edges_path);
  m["outputs"] = {"entropy.json", "pairs.csv"};
  write_json(m, out_dir / "manifest.json");
  return 0;
}

// ------------------------------------------------------------------------ map

struct MapArgs {
  std::string nodes_path, edges_path, towers_path, trajectories_path;
  std::string algorithm = "ctmapper";
};

std::vector<fs::path> trajectory_files(const fs::path &path) {
  if (!fs::is_directory(path)) return {path};
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::runtime_error("no .csv trajectory files in " + path.string());
  }
  return files;
}

int cmd_map(const GlobalArgs &global, const ToolConfig &cfg,
            const MapArgs &args) {
  const graph::MultilayerGraph g =
      io::load_graph_files(args.nodes_path, args.edges_path);
  const std::vector<cell_net::TowerSite> sites =
      io::load_towers_file(args.towers_path);

  geo::BoundingBox bbox;
  bool first = true;
  for (const auto &s : sites) {
    if (first) {
      bbox.min_lat = bbox.max_lat = s.pos.lat;
      bbox.min_lon = bbox.max_lon = s.pos.lon;
      first = false;
    }
    bbox.min_lat = std::min(bbox.min_lat, s.pos.lat);
    bbox.max_lat = std::max(bbox.max_lat, s.pos.lat);
    bbox.min_lon = std::min(bbox.min_lon, s.pos.lon);
    bbox.max_lon = std::max(bbox.max_lon, s.pos.lon);
  }
  // pad so every tower is strictly inside its own bounding box
  const double pad_lat = std::max(0.02, 0.05 * (bbox.max_lat - bbox.min_lat));
  const double pad_lon = std::max(0.02, 0.05 * (bbox.max_lon - bbox.min_lon));
  bbox.min_lat -= pad_lat;
  bbox.max_lat += pad_lat;
  bbox.min_lon -= pad_lon;
  bbox.max_lon += pad_lon;
  const cell_net::CellularNetwork net =
      cell_net::build_network(sites, bbox, cfg.cell_options);

  const std::vector<fs::path> files = trajectory_files(args.trajectories_path);
  std::vector<mapper::CellularTrajectory> trajectories;
  std::set<std::string> ids;
  for (const fs::path &f : files) {
    for (auto &t : io::load_trajectories_file(f)) {
      if (!ids.insert(t.trajectory_id).second) {
        throw std::runtime_error("trajectory " + t.trajectory_id +
                                 " appears in more than one input file");
      }
      trajectories.push_back(std::move(t));
    }
  }
  std::sort(trajectories.begin(), trajectories.end(),
            [](const auto &a, const auto &b) {
              return a.trajectory_id < b.trajectory_id;
            });

  const mapper::Algorithm algorithm = mapper::parse_algorithm(args.algorithm);
  std::vector<mapper::CompletePath> paths(trajectories.size());
  par::parallel_for(trajectories.size(), global.jobs, [&](size_t i) {
    paths[i] =
        mapper::map_trajectory(g, net, trajectories[i], cfg.mapper_params,
                               algorithm);
  });

  const fs::path out_dir(global.out_dir);
  fs::create_directories(out_dir);
  io::save_paths_file(paths, g, out_dir / "paths.csv");

  ordered_json sidecar;
  sidecar["algorithm"] = mapper::algorithm_name(algorithm);
  sidecar["parameters"] = mapper_params_json(cfg.mapper_params);
  ordered_json rows = ordered_json::array();
  size_t failures = 0;
  for (const auto &p : paths) {
    ordered_json row;
    row["trajectory_id"] = p.trajectory_id;
    row["failed"] = p.failed;
    if (p.failed) {
      ++failures;
      row["failure_reason"] = p.failure_reason;
    } else {
      row["log_score"] = p.log_score;
      row["nodes"] = p.nodes.size();
      row["skeleton_nodes"] = p.skeleton_indices.size();
    }
    if (!p.notes.empty()) row["notes"] = p.notes;
    rows.push_back(row);
  }
  sidecar["trajectories"] = rows;
  write_json(sidecar, out_dir / "paths.json");

  ordered_json m = manifest_base("map");
  m["parameters"]["algorithm"] = mapper::algorithm_name(algorithm);
  m["parameters"].update(mapper_params_json(cfg.mapper_params));
  m["parameters"]["jobs"] = global.jobs;
  manifest_input(m, "nodes", args.nodes_path);
  manifest_input(m, "edges", args.edges_path);
  manifest_input(m, "towers", args.towers_path);
  for (size_t i = 0; i < files.size(); ++i) {
    manifest_input(m, files.size() == 1 ? std::string("trajectories")
                                        : "trajectories[" + std::to_string(i) +
                                              "]",
                   files[i]);
  }
  ordered_json failed_ids = ordered_json::array();
  for (const auto &p : paths) {
    if (p.failed) {
      ordered_json f;
      f["trajectory_id"] = p.trajectory_id;
      f["reason"] = p.failure_reason;
      failed_ids.push_back(f);
    }
  }
  m["failures"] = failed_ids;
  m["outputs"] = {"paths.csv", "paths.json"};
  write_json(m, out_dir / "manifest.json");

  std::printf("mapped %zu trajectories (%zu failed) with %s\n",
              trajectories.size(), failures,
              mapper::algorithm_name(algorithm).c_str());
  return 0;
}

// --------------------------------------------------------------------evaluate

struct EvaluateArgs {
  std::string nodes_path, edges_path, paths_path, truth_path;
  std::string compare_path;
  std::vector<double> epsilons;
};

void append_metric_rows(std::ofstream &out, const eval::EvalReport &report) {
  for (const auto &row : report.trajectories) {
    if (row.failed) {
      out << row.trajectory_id << ",,error," << row.error << '\n';
      continue;
    }
    for (size_t e = 0; e < report.epsilon_grid.size(); ++e) {
      const std::string eps = io::format_double(report.epsilon_grid[e]);
      out << row.trajectory_id << ',' << eps << ",skeleton_similarity,"
          << io::format_double(row.skeleton_similarity[e]) << '\n';
      out << row.trajectory_id << ',' << eps << ",complete_similarity,"
          << io::format_double(row.complete_similarity[e]) << '\n';
      out << row.trajectory_id << ',' << eps << ",precision,"
          << io::format_double(row.precision[e]) << '\n';
      out << row.trajectory_id << ',' << eps << ",recall,"
          << io::format_double(row.recall[e]) << '\n';
      out << row.trajectory_id << ',' << eps << ",layer_precision,"
          << io::format_double(row.layer_precision[e]) << '\n';
      out << row.trajectory_id << ',' << eps << ",layer_recall,"
          << io::format_double(row.layer_recall[e]) << '\n';
    }
    out << row.trajectory_id << ",,rmse_km," << io::format_double(row.rmse_km)
        << '\n';
    out << row.trajectory_id << ",,edit_km," << io::format_double(row.edit_km)
        << '\n';
  }
}

ordered_json eval_summary_json(const eval::EvalReport &report) {
  ordered_json j;
  j["epsilon_grid"] = report.epsilon_grid;
  j["mean_skeleton_similarity"] = report.mean_skeleton_similarity;
  j["mean_complete_similarity"] = report.mean_complete_similarity;
  j["mean_precision"] = report.mean_precision;
  j["mean_recall"] = report.mean_recall;
  j["mean_layer_precision"] = report.mean_layer_precision;
  j["mean_layer_recall"] = report.mean_layer_recall;
  j["mean_rmse_km"] = report.mean_rmse_km;
  j["mean_edit_km"] = report.mean_edit_km;
  j["evaluated"] = report.evaluated;
  j["failed"] = report.failed;
  return j;
}

int cmd_evaluate(const GlobalArgs &global, const EvaluateArgs &args) {
  const graph::MultilayerGraph g =
      io::load_graph_files(args.nodes_path, args.edges_path);
  const std::vector<mapper::CompletePath> preds =
      io::load_paths_file(args.paths_path, g);
  std::vector<eval::GroundTruth> truths =
      io::load_truths_file(args.truth_path, g);

  size_t dropped_gps = 0;
  for (auto &t : truths) {
    if (t.nodes.empty() && !t.gps_points.empty()) {
      size_t dropped = 0;
      t = eval::snap_gps_truth(g, t, 0.1, &dropped);
      dropped_gps += dropped;
    }
  }

  const std::vector<double> grid =
      args.epsilons.empty() ? eval::default_epsilon_grid() : args.epsilons;
  const eval::EvalReport report =
      eval::evaluate_corpus(g, preds, truths, grid, global.jobs);

  const fs::path out_dir(global.out_dir);
  fs::create_directories(out_dir);
  {
    std::ofstream out = open_out(out_dir / "report.csv");
    out << "trajectory_id,epsilon,metric,value\n";
    append_metric_rows(out, report);
  }

  ordered_json summary = eval_summary_json(report);
  summary["dropped_gps_points"] = dropped_gps;

  ordered_json m = manifest_base("evaluate");
  m["parameters"]["epsilon_grid"] = grid;
  m["parameters"]["jobs"] = global.jobs;
  manifest_input(m, "nodes", args.nodes_path);
  manifest_input(m, "edges", args.edges_path);
  manifest_input(m, "paths", args.paths_path);
  manifest_input(m, "truth", args.truth_path);
  m["outputs"] = {"report.csv", "summary.json"};

  if (!args.compare_path.empty()) {
    const std::vector<mapper::CompletePath> other =
        io::load_paths_file(args.compare_path, g);
    const eval::EvalReport other_report =
        eval::evaluate_corpus(g, other, truths, grid, global.jobs);
    std::ofstream out = open_out(out_dir / "comparison.csv");
    out << "metric,epsilon,primary,comparison\n";
    const auto dump_pair = [&](const char *metric,
                               const std::vector<double> &a,
                               const std::vector<double> &b) {
      for (size_t e = 0; e < grid.size(); ++e) {
        out << metric << ',' << io::format_double(grid[e]) << ','
            << io::format_double(a[e]) << ',' << io::format_double(b[e])
            << '\n';
      }
    };
    dump_pair("skeleton_similarity", report.mean_skeleton_similarity,
              other_report.mean_skeleton_similarity);
    dump_pair("complete_similarity", report.mean_complete_similarity,
              other_report.mean_complete_similarity);
    dump_pair("precision", report.mean_precision, other_report.mean_precision);
    dump_pair("recall", report.mean_recall, other_report.mean_recall);
    dump_pair("layer_precision", report.mean_layer_precision,
              other_report.mean_layer_precision);
    dump_pair("layer_recall", report.mean_layer_recall,
              other_report.mean_layer_recall);
    out << "rmse_km,," << io::format_double(report.mean_rmse_km) << ','
        << io::format_double(other_report.mean_rmse_km) << '\n';
    out << "edit_km,," << io::format_double(report.mean_edit_km) << ','
        << io::format_double(other_report.mean_edit_km) << '\n';
    summary["comparison"] = eval_summary_json(other_report);
    manifest_input(m, "compare", args.compare_path);
    m["outputs"].push_back("comparison.csv");
  }

  write_json(summary, out_dir / "summary.json");
  write_json(m, out_dir / "manifest.json");

  std::printf("evaluated %zu trajectories (%zu failed)\n", report.evaluated,
              report.failed);
  return 0;
}

// ------------------------------------------------------------------- simulate

struct SimulateArgs {
  size_t trips = 0;
  double min_trip_km = 8.0;
};

int cmd_simulate(const GlobalArgs &global, const ToolConfig &cfg,
                 const SimulateArgs &args) {
  synth::SynthConfig config = cfg.synth_config;
  if (global.seed >= 0) config.seed = uint64_t(global.seed);

  const synth::World world = synth::generate_world(config);
  const std::vector<synth::Trip> corpus =
      synth::generate_corpus(world, config, args.trips, args.min_trip_km);

  const fs::path out_dir(global.out_dir);
  fs::create_directories(out_dir);
  io::save_graph_files(world.graph, out_dir / "nodes.csv",
                       out_dir / "edges.csv");
  std::vector<cell_net::TowerSite> sites;
  sites.reserve(world.network.tower_count());
  for (cell_net::TowerIndex i = 0; i < world.network.tower_count(); ++i) {
    sites.push_back({world.network.tower(i).id, world.network.tower(i).pos});
  }
  io::save_towers_file(sites, out_dir / "towers.csv");
  {
    std::ofstream out = open_out(out_dir / "voronoi.csv");
    io::save_voronoi(world.network, out);
  }

  std::vector<mapper::CellularTrajectory> trajectories;
  std::vector<eval::GroundTruth> truths;
  trajectories.reserve(corpus.size());
  truths.reserve(corpus.size());
  for (const auto &trip : corpus) {
    trajectories.push_back(trip.trajectory);
    truths.push_back(trip.truth);
  }
  io::save_trajectories_file(trajectories, out_dir / "trajectories.csv");
  io::save_truths_file(truths, world.graph, out_dir / "truth.csv");

  ordered_json m = manifest_base("simulate");
  m["parameters"] = synth_config_json(config);
  m["parameters"]["trips"] = args.trips;
  m["parameters"]["min_trip_km"] = args.min_trip_km;
  m["outputs"] = {"nodes.csv", "edges.csv",        "towers.csv",
                  "voronoi.csv", "trajectories.csv", "truth.csv"};
  write_json(m, out_dir / "manifest.json");

  std::printf("world: %zu nodes, %zu edges, %zu towers; %zu trips\n",
              world.graph.node_count(), world.graph.edge_count(),
              world.network.tower_count(), corpus.size());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"sparse cellular trajectory mapping toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("ctmap ") + kVersion);

  GlobalArgs global;
  app.add_option("--config", global.config_path,
                 "key=value overrides file (mapper.*, synth.*, cell.*, "
                 "distance)")
      ->check(CLI::ExistingFile);
  app.add_option("--jobs", global.jobs, "worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  app.add_option("--seed", global.seed, "master random seed")
      ->check(CLI::Range(int64_t(0), std::numeric_limits<int64_t>::max()));
  app.add_option("--out-dir", global.out_dir, "output directory")
      ->capture_default_str();

  BuildGraphArgs build_args;
  CLI::App *build = app.add_subcommand(
      "build-graph", "load, link and canonicalize a multilayer graph");
  build->fallthrough();
  build->add_option("--nodes", build_args.nodes_path, "nodes csv")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--edges", build_args.edges_path, "edges csv")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option *radius_opt =
      build->add_option("--connect-radius", build_args.connect_radius,
                        "link stations to nodes of other layers within this "
                        "radius (km)")
          ->check(CLI::PositiveNumber);

  EntropyArgs entropy_args;
  CLI::App *entropy_cmd = app.add_subcommand(
      "entropy", "search-information entropy of a graph");
  entropy_cmd->fallthrough();
  entropy_cmd->add_option("--nodes", entropy_args.nodes_path, "nodes csv")
      ->required()
      ->check(CLI::ExistingFile);
  entropy_cmd->add_option("--edges", entropy_args.edges_path, "edges csv")
      ->required()
      ->check(CLI::ExistingFile);
  entropy_cmd
      ->add_option("--layer", entropy_args.layer,
                   "scope: the aggregate graph or a single layer")
      ->check(CLI::IsMember({"all", "road", "metro", "train"}))
      ->capture_default_str();
  entropy_cmd
      ->add_option("--budget", entropy_args.budget,
                   "max ordered pairs to evaluate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  entropy_cmd
      ->add_option("--swap-factor", entropy_args.swap_factor,
                   "rewiring attempts per edge for the randomized baseline "
                   "(0 disables)")
      ->capture_default_str();

  MapArgs map_args;
  CLI::App *map_cmd =
      app.add_subcommand("map", "map cellular trajectories onto the graph");
  map_cmd->fallthrough();
  map_cmd->add_option("--nodes", map_args.nodes_path, "nodes csv")
      ->required()
      ->check(CLI::ExistingFile);
  map_cmd->add_option("--edges", map_args.edges_path, "edges csv")
      ->required()
      ->check(CLI::ExistingFile);
  map_cmd->add_option("--towers", map_args.towers_path, "towers csv")
      ->required()
      ->check(CLI::ExistingFile);
  map_cmd
      ->add_option("--trajectories", map_args.trajectories_path,
                   "trajectory csv file or directory of them")
      ->required()
      ->check(CLI::ExistingPath);
  map_cmd->add_option("--algorithm", map_args.algorithm, "mapping algorithm")
      ->check(CLI::IsMember({"ctmapper", "baseline1", "baseline2"}))
      ->capture_default_str();

  EvaluateArgs eval_args;
  CLI::App *eval_cmd = app.add_subcommand(
      "evaluate", "score mapped paths against ground truth");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--nodes", eval_args.nodes_path, "nodes csv")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--edges", eval_args.edges_path, "edges csv")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--paths", eval_args.paths_path, "mapped paths csv")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth", eval_args.truth_path, "ground truth csv")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd
      ->add_option("--compare", eval_args.compare_path,
                   "second paths csv; adds a side-by-side comparison")
      ->check(CLI::ExistingFile);
  eval_cmd
      ->add_option("--epsilons", eval_args.epsilons,
                   "match radii in km (default 0.1..1.0)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  SimulateArgs sim_args;
  CLI::App *sim_cmd = app.add_subcommand(
      "simulate", "generate a synthetic world and trip corpus");
  sim_cmd->fallthrough();
  sim_cmd->add_option("--trips", sim_args.trips, "number of trips")
      ->required()
      ->check(CLI::PositiveNumber);
  sim_cmd
      ->add_option("--min-trip-km", sim_args.min_trip_km,
                   "minimum truth length per trip")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    ToolConfig cfg;
    if (!global.config_path.empty()) {
      apply_config_file(global.config_path, cfg);
    }
    build_args.connect = radius_opt->count() > 0;
    if (app.got_subcommand(build)) return cmd_build_graph(global, build_args);
    if (app.got_subcommand(entropy_cmd)) return cmd_entropy(global, entropy_args);
    if (app.got_subcommand(map_cmd)) return cmd_map(global, cfg, map_args);
    if (app.got_subcommand(eval_cmd)) return cmd_evaluate(global, eval_args);
    if (app.got_subcommand(sim_cmd)) return cmd_simulate(global, cfg, sim_args);
  } catch (const usage_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
