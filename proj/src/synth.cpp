#include "ctmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ctmap/rng.hpp"

namespace ctmap::synth {

namespace {

std::string pad(int v, int width) {
  std::string s = std::to_string(v);
  while (int(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

struct Segment {
  geo::XY a, b;
};

double seg_length(const Segment &s) {
  return std::hypot(s.b.x - s.a.x, s.b.y - s.a.y);
}

geo::XY seg_point(const Segment &s, double dist) {
  const double len = seg_length(s);
  const double t = len > 0.0 ? dist / len : 0.0;
  return {s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y)};
}

// Stations of one transit line: points spaced spacing_km along the segment.
std::vector<geo::XY> line_stations(const Segment &seg, double spacing_km) {
  const double len = seg_length(seg);
  const int n = std::max(2, int(std::floor(len / spacing_km)) + 1);
  std::vector<geo::XY> out;
  out.reserve(size_t(n));
  for (int k = 0; k < n; ++k) out.push_back(seg_point(seg, k * spacing_km));
  return out;
}

void add_line(graph::MultilayerGraph &g, const geo::LocalProjection &proj,
              const std::string &prefix, const Segment &seg, double spacing_km,
              graph::Layer layer, graph::EdgeClass cls) {
  const std::vector<geo::XY> stations = line_stations(seg, spacing_km);
  std::vector<graph::NodeIndex> idx;
  idx.reserve(stations.size());
  for (size_t k = 0; k < stations.size(); ++k) {
    idx.push_back(
        g.add_node(prefix + "_" + pad(int(k), 3), proj.to_latlon(stations[k]), layer));
  }
  for (size_t k = 1; k < idx.size(); ++k) {
    g.add_edge(idx[k - 1], idx[k], cls);
  }
}

void check_layer(const graph::MultilayerGraph &g, graph::Layer layer,
                 double target_degree, double target_length) {
  const graph::LayerStats s = graph::layer_stats(g, layer);
  if (s.nodes == 0) return;
  const auto within = [](double value, double target) {
    return value >= target / 1.5 && value <= target * 1.5;
  };
  if (!within(s.mean_degree, target_degree) ||
      !within(s.mean_edge_length_km, target_length)) {
    throw std::logic_error(
        "generated " + graph::layer_name(layer) +
        " layer out of range: degree " + std::to_string(s.mean_degree) +
        " (target " + std::to_string(target_degree) + "), length " +
        std::to_string(s.mean_edge_length_km) + " (target " +
        std::to_string(target_length) + ")");
  }
}

// Two nearest towers to a point; ties by id. Second is kInvalidTower when
// the network has a single tower.
std::pair<cell_net::TowerIndex, cell_net::TowerIndex> two_nearest_towers(
    const cell_net::CellularNetwork &net, const geo::LatLon &p) {
  cell_net::TowerIndex first = cell_net::kInvalidTower;
  cell_net::TowerIndex second = cell_net::kInvalidTower;
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = d1;
  for (cell_net::TowerIndex i = 0; i < net.tower_count(); ++i) {
    const double d = geo::distance_km(p, net.tower(i).pos);
    const bool beats_first =
        d < d1 || (d == d1 && first != cell_net::kInvalidTower &&
                   net.tower(i).id < net.tower(first).id);
    if (beats_first) {
      second = first;
      d2 = d1;
      first = i;
      d1 = d;
    } else if (d < d2 || (d == d2 && second != cell_net::kInvalidTower &&
                          net.tower(i).id < net.tower(second).id)) {
      second = i;
      d2 = d;
    }
  }
  return {first, second};
}

}  // namespace

World generate_world(const SynthConfig &config) {
  if (config.road_rows < 2 || config.road_cols < 2) {
    throw std::invalid_argument("road grid needs at least 2x2 nodes");
  }
  if (config.observation_interval_s <= 0.0) {
    throw std::invalid_argument("observation interval must be > 0");
  }
  if (config.assignment_noise < 0.0 || config.assignment_noise > 0.5) {
    throw std::invalid_argument("assignment noise must be in [0, 0.5]");
  }

  const geo::LocalProjection proj(config.origin);
  const double W = (config.road_cols - 1) * config.road_spacing_km;
  const double H = (config.road_rows - 1) * config.road_spacing_km;

  std::string last_error = "disconnected world";
  for (int attempt = 0; attempt < 10; ++attempt) {
    graph::MultilayerGraph g;

    // road lattice; a few columns and rows get faster classes so the
    // weighted router has real choices to make
    std::vector<std::vector<graph::NodeIndex>> grid(
        size_t(config.road_rows),
        std::vector<graph::NodeIndex>(size_t(config.road_cols)));
    for (int r = 0; r < config.road_rows; ++r) {
      for (int c = 0; c < config.road_cols; ++c) {
        grid[r][c] = g.add_node(
            "r" + pad(r, 3) + "_" + pad(c, 3),
            proj.to_latlon({c * config.road_spacing_km,
                            r * config.road_spacing_km}),
            graph::Layer::Road);
      }
    }
    for (int r = 0; r < config.road_rows; ++r) {
      for (int c = 0; c < config.road_cols; ++c) {
        if (c + 1 < config.road_cols) {
          const auto cls = (r % 7 == 3) ? graph::EdgeClass::RoadRegional
                                        : graph::EdgeClass::RoadLocal;
          g.add_edge(grid[r][c], grid[r][c + 1], cls);
        }
        if (r + 1 < config.road_rows) {
          const auto cls = (c % 6 == 3) ? graph::EdgeClass::RoadPrincipal
                                        : graph::EdgeClass::RoadLocal;
          g.add_edge(grid[r][c], grid[r + 1][c], cls);
        }
      }
    }

    static constexpr double kLineOffsets[] = {0.35, 0.55, 0.45, 0.65, 0.25};
    for (int l = 0; l < config.metro_lines; ++l) {
      const double f = kLineOffsets[size_t(l) % 5];
      Segment seg;
      switch (l % 3) {
        case 0: seg = {{0.08 * W, f * H}, {0.92 * W, f * H}}; break;
        case 1: seg = {{f * W, 0.08 * H}, {f * W, 0.92 * H}}; break;
        default: seg = {{0.12 * W, 0.12 * H}, {0.88 * W, 0.88 * H}}; break;
      }
      add_line(g, proj, "m" + std::to_string(l), seg,
               config.metro_station_spacing_km, graph::Layer::Metro,
               graph::EdgeClass::Metro);
    }
    for (int l = 0; l < config.train_lines; ++l) {
      const double f = kLineOffsets[size_t(l + 2) % 5];
      Segment seg;
      if (l % 2 == 0) {
        seg = {{0.0, f * H}, {W, f * H}};
      } else {
        seg = {{f * W, 0.0}, {f * W, H}};
      }
      add_line(g, proj, "t" + std::to_string(l), seg,
               config.train_station_spacing_km, graph::Layer::Train,
               graph::EdgeClass::Train);
    }

    graph::connect_layers(g, config.crosslayer_radius_km);

    if (!g.connected()) {
      last_error = "world is disconnected (attempt " +
                   std::to_string(attempt + 1) + ")";
      continue;
    }

    check_layer(g, graph::Layer::Road, 3.01, 1.34);
    check_layer(g, graph::Layer::Metro, 2.35, 0.757);
    check_layer(g, graph::Layer::Train, 2.025, 3.07);

    // antenna grid, jittered; the jitter stream is reseeded per attempt
    rng::Rng jitter(rng::derive_seed(config.seed, 7000 + uint64_t(attempt)));
    std::vector<cell_net::TowerSite> sites;
    const int nx = std::max(2, int(std::floor(W / config.antenna_spacing_km)));
    const int ny = std::max(2, int(std::floor(H / config.antenna_spacing_km)));
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        geo::XY p{(i + 0.5) * config.antenna_spacing_km,
                  (j + 0.5) * config.antenna_spacing_km};
        p.x += jitter.uniform(-config.antenna_jitter_km,
                              config.antenna_jitter_km);
        p.y += jitter.uniform(-config.antenna_jitter_km,
                              config.antenna_jitter_km);
        geo::LatLon pos = proj.to_latlon(p);
        // an antenna may never sit exactly on a graph node; nudge it north
        for (int guard = 0; guard < 4; ++guard) {
          const graph::NodeIndex nn = g.nearest_node(pos);
          if (nn == graph::kInvalidNode ||
              geo::distance_km(pos, g.node(nn).pos) > 1e-9) {
            break;
          }
          p.y += 0.001;
          pos = proj.to_latlon(p);
        }
        sites.push_back(
            {"a" + pad(i, 2) + "_" + pad(j, 2), pos});
      }
    }

    geo::BoundingBox bbox;
    const geo::LatLon sw =
        proj.to_latlon({-config.bbox_margin_km, -config.bbox_margin_km});
    const geo::LatLon ne =
        proj.to_latlon({W + config.bbox_margin_km, H + config.bbox_margin_km});
    bbox.min_lat = sw.lat;
    bbox.min_lon = sw.lon;
    bbox.max_lat = ne.lat;
    bbox.max_lon = ne.lon;

    World world{std::move(g),
                cell_net::build_network(sites, bbox, cell_net::BuildOptions{}),
                bbox};
    return world;
  }
  throw std::runtime_error("world generation failed after 10 attempts: " +
                           last_error);
}

Trip simulate_trip(const World &world, graph::NodeIndex src,
                   graph::NodeIndex dst, const SynthConfig &config,
                   uint64_t seed, const std::string &trajectory_id) {
  const auto sp =
      graph::shortest_path(world.graph, src, dst, graph::CostModel::Weighted);
  if (!sp) {
    throw std::invalid_argument("trip endpoints are not connected");
  }
  const std::vector<graph::NodeIndex> &path = sp->path;

  // cumulative traversal time (seconds) at each path node
  std::vector<double> at(path.size(), 0.0);
  for (size_t k = 1; k < path.size(); ++k) {
    const graph::HalfEdge *e = world.graph.edge_between(path[k - 1], path[k]);
    at[k] = at[k - 1] + e->weight * e->length_km * 3600.0;
  }
  const double duration = at.back();
  if (duration < config.observation_interval_s) {
    throw std::runtime_error("trip " + trajectory_id +
                             " is shorter than one observation interval");
  }

  const geo::LocalProjection proj(world.bbox.center());
  std::vector<geo::XY> xy(path.size());
  for (size_t k = 0; k < path.size(); ++k) {
    xy[k] = proj.to_xy(world.graph.node(path[k]).pos);
  }
  const auto position_at = [&](double t) -> geo::LatLon {
    size_t k = size_t(std::upper_bound(at.begin(), at.end(), t) - at.begin());
    if (k == 0) return world.graph.node(path.front()).pos;
    if (k >= at.size()) return world.graph.node(path.back()).pos;
    const double span = at[k] - at[k - 1];
    const double f = span > 0.0 ? (t - at[k - 1]) / span : 0.0;
    return proj.to_latlon({xy[k - 1].x + f * (xy[k].x - xy[k - 1].x),
                           xy[k - 1].y + f * (xy[k].y - xy[k - 1].y)});
  };

  std::vector<double> sample_times;
  const size_t grid_samples =
      size_t(std::floor(duration / config.observation_interval_s)) + 1;
  for (size_t k = 0; k < grid_samples; ++k) {
    sample_times.push_back(double(k) * config.observation_interval_s);
  }
  if (duration - sample_times.back() > 1e-9) sample_times.push_back(duration);

  rng::Rng noise(seed);
  Trip trip;
  trip.truth.trajectory_id = trajectory_id;
  trip.truth.nodes = path;
  trip.trajectory.trajectory_id = trajectory_id;
  int64_t prev_ts = -1;
  for (const double t : sample_times) {
    const geo::LatLon p = position_at(t);
    auto [first, second] = two_nearest_towers(world.network, p);
    cell_net::TowerIndex chosen = first;
    if (noise.bernoulli(config.assignment_noise) &&
        second != cell_net::kInvalidTower) {
      chosen = second;
    }
    int64_t ts = int64_t(std::llround(t));
    if (ts <= prev_ts) ts = prev_ts + 1;
    prev_ts = ts;
    trip.trajectory.observations.push_back(
        mapper::Observation{ts, world.network.tower(chosen).id});
  }
  return trip;
}

std::vector<Trip> generate_corpus(const World &world, const SynthConfig &config,
                                  size_t n_trips, double min_trip_km) {
  const std::vector<graph::NodeIndex> roads =
      world.graph.nodes_of_layer(graph::Layer::Road);
  if (roads.size() < 2) {
    throw std::invalid_argument("world has fewer than 2 road nodes");
  }
  rng::Rng pick(rng::derive_seed(config.seed, 0xC0DE));
  std::vector<Trip> corpus;
  corpus.reserve(n_trips);
  for (size_t i = 0; i < n_trips; ++i) {
    bool placed = false;
    for (int tries = 0; tries < 1000 && !placed; ++tries) {
      const graph::NodeIndex src = roads[pick.below(roads.size())];
      const graph::NodeIndex dst = roads[pick.below(roads.size())];
      if (src == dst) continue;
      if (geo::distance_km(world.graph.node(src).pos,
                           world.graph.node(dst).pos) < 0.6 * min_trip_km) {
        continue;
      }
      const auto sp = graph::shortest_path(world.graph, src, dst,
                                           graph::CostModel::Weighted);
      if (!sp) continue;
      double length = 0.0;
      for (size_t k = 1; k < sp->path.size(); ++k) {
        length += geo::distance_km(world.graph.node(sp->path[k - 1]).pos,
                                   world.graph.node(sp->path[k]).pos);
      }
      if (length < min_trip_km) continue;
      if (sp->cost * 3600.0 < 1.2 * config.observation_interval_s) continue;
      corpus.push_back(simulate_trip(world, src, dst, config,
                                     rng::derive_seed(config.seed, 1 + i),
                                     "trip" + pad(int(i), 4)));
      placed = true;
    }
    if (!placed) {
      throw std::runtime_error("could not place trip " + std::to_string(i) +
                               "; relax min_trip_km or enlarge the world");
    }
  }
  return corpus;
}

mapper::DecodedSequence brute_force_decode(
    const graph::MultilayerGraph &g,
    const std::vector<std::vector<mapper::Candidate>> &steps,
    mapper::TransitionScorer &scorer) {
  const size_t T = steps.size();
  if (T == 0) throw std::invalid_argument("no observation steps");
  double space = 1.0;
  for (const auto &s : steps) {
    if (s.empty()) throw std::runtime_error("empty candidate set");
    space *= double(s.size());
    if (space > 1e6) {
      throw std::runtime_error("sequence space exceeds the oracle budget");
    }
  }

  // b wins a tie when its reversed id sequence is lexicographically
  // smaller; this is exactly the choice the backtracking decoder makes.
  const auto reversed_less = [&g](const std::vector<graph::NodeIndex> &a,
                                  const std::vector<graph::NodeIndex> &b) {
    for (size_t t = a.size(); t-- > 0;) {
      const std::string &ia = g.node(a[t]).id;
      const std::string &ib = g.node(b[t]).id;
      if (ia != ib) return ia < ib;
    }
    return false;
  };

  std::vector<size_t> idx(T, 0);
  std::vector<graph::NodeIndex> seq(T);
  mapper::DecodedSequence best;
  best.log_score = -std::numeric_limits<double>::infinity();
  for (;;) {
    for (size_t t = 0; t < T; ++t) seq[t] = steps[t][idx[t]].node;
    double score = std::log(steps[0][idx[0]].emission);
    for (size_t t = 1; t < T; ++t) {
      score = score + scorer.log_score(seq[t - 1], seq[t]);
      score = score + std::log(steps[t][idx[t]].emission);
    }
    if (score > best.log_score ||
        (score == best.log_score && !best.nodes.empty() &&
         reversed_less(seq, best.nodes))) {
      best.log_score = score;
      best.nodes = seq;
    }
    size_t t = T;
    while (t-- > 0) {
      if (++idx[t] < steps[t].size()) break;
      idx[t] = 0;
      if (t == 0) {
        if (best.nodes.empty() ||
            best.log_score == -std::numeric_limits<double>::infinity()) {
          throw std::runtime_error("all candidate sequences score zero");
        }
        return best;
      }
    }
  }
}

mapper::SkeletonPath brute_force_skeleton(const graph::MultilayerGraph &g,
                                          const cell_net::CellularNetwork &net,
                                          const mapper::CellularTrajectory &traj,
                                          const mapper::MapperParams &params,
                                          mapper::TransitionModel model) {
  std::vector<std::vector<mapper::Candidate>> steps(traj.observations.size());
  for (size_t t = 0; t < traj.observations.size(); ++t) {
    steps[t] = mapper::candidate_states(g, net, traj.observations[t], params);
  }
  mapper::TransitionScorer scorer(g, params, model);
  mapper::DecodedSequence decoded = brute_force_decode(g, steps, scorer);
  mapper::SkeletonPath out;
  out.trajectory_id = traj.trajectory_id;
  out.nodes = std::move(decoded.nodes);
  out.log_score = decoded.log_score;
  return out;
}

}  // namespace ctmap::synth
