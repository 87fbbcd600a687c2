#include "ctmap/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace ctmap::io {

namespace {

std::string trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

struct Row {
  std::vector<std::string> fields;
  size_t line = 0;
};

/**
 * Line reader shared by every loader: skips blank and `#` lines, checks
 * the header verbatim, enforces the field count on every record.
 */
class CsvReader {
 public:
  CsvReader(std::istream &in, std::string source,
            const std::vector<std::string> &accepted_headers)
      : in_(in), source_(std::move(source)) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      for (size_t h = 0; h < accepted_headers.size(); ++h) {
        if (t == accepted_headers[h]) {
          header_index_ = h;
          n_fields_ = split_fields(accepted_headers[h]).size();
          return;
        }
      }
      throw ParseError(source_, line_no_,
                       "expected header `" + accepted_headers[0] +
                           "`, got `" + t + "`");
    }
    throw ParseError(source_, line_no_ + 1, "missing header line");
  }

  size_t header_index() const { return header_index_; }
  const std::string &source() const { return source_; }

  bool next(Row &row) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      row.fields = split_fields(t);
      row.line = line_no_;
      if (row.fields.size() != n_fields_) {
        throw ParseError(source_, line_no_,
                         "expected " + std::to_string(n_fields_) +
                             " fields, got " +
                             std::to_string(row.fields.size()));
      }
      return true;
    }
    return false;
  }

 private:
  std::istream &in_;
  std::string source_;
  size_t line_no_ = 0;
  size_t header_index_ = 0;
  size_t n_fields_ = 0;
};

double parse_double_field(const CsvReader &r, const Row &row,
                          const std::string &value, const char *what) {
  double v = 0.0;
  const char *begin = value.data();
  const char *end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(r.source(), row.line,
                     std::string("invalid ") + what + ": `" + value + "`");
  }
  return v;
}

int64_t parse_int_field(const CsvReader &r, const Row &row,
                        const std::string &value, const char *what) {
  int64_t v = 0;
  const char *begin = value.data();
  const char *end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(r.source(), row.line,
                     std::string("invalid ") + what + ": `" + value + "`");
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

/**
 * Shared grouping walk for the three grouped-by-trajectory formats. Calls
 * on_group(id, rows) once per contiguous block; a trajectory id that
 * reappears after a different one is an error.
 */
template <typename OnGroup>
void read_groups(CsvReader &reader, OnGroup &&on_group) {
  std::set<std::string> seen;
  std::string current;
  std::vector<Row> block;
  Row row;
  const auto flush = [&] {
    if (!block.empty()) on_group(current, block);
    block.clear();
  };
  while (reader.next(row)) {
    const std::string &id = row.fields[0];
    if (id.empty()) {
      throw ParseError(reader.source(), row.line, "empty trajectory_id");
    }
    if (id != current) {
      flush();
      if (!seen.insert(id).second) {
        throw ParseError(reader.source(), row.line,
                         "trajectory " + id +
                             " reappears after other trajectories; rows must "
                             "be grouped");
      }
      current = id;
    }
    block.push_back(row);
  }
  flush();
}

}  // namespace

ParseError::ParseError(const std::string &source, size_t line,
                       const std::string &what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what) {}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

graph::MultilayerGraph load_graph(std::istream &nodes, std::istream &edges,
                                  const std::string &nodes_name,
                                  const std::string &edges_name) {
  graph::MultilayerGraph g;

  CsvReader node_reader(nodes, nodes_name, {"id,lat,lon,layer"});
  Row row;
  while (node_reader.next(row)) {
    const double lat =
        parse_double_field(node_reader, row, row.fields[1], "lat");
    const double lon =
        parse_double_field(node_reader, row, row.fields[2], "lon");
    try {
      g.add_node(row.fields[0], {lat, lon},
                 graph::parse_layer(row.fields[3]));
    } catch (const std::invalid_argument &e) {
      throw ParseError(nodes_name, row.line, e.what());
    }
  }

  CsvReader edge_reader(edges, edges_name, {"src,dst,class,length_km"});
  while (edge_reader.next(row)) {
    std::optional<double> length;
    if (!row.fields[3].empty()) {
      length = parse_double_field(edge_reader, row, row.fields[3],
                                  "length_km");
    }
    try {
      g.add_edge(row.fields[0], row.fields[1],
                 graph::parse_edge_class(row.fields[2]), length);
    } catch (const std::out_of_range &e) {
      throw ParseError(edges_name, row.line, e.what());
    } catch (const std::invalid_argument &e) {
      throw ParseError(edges_name, row.line, e.what());
    }
  }
  return g;
}

graph::MultilayerGraph load_graph_files(const std::filesystem::path &nodes,
                                        const std::filesystem::path &edges) {
  std::ifstream n = open_input(nodes);
  std::ifstream e = open_input(edges);
  return load_graph(n, e, nodes.string(), edges.string());
}

void save_graph(const graph::MultilayerGraph &g, std::ostream &nodes,
                std::ostream &edges) {
  std::vector<graph::NodeIndex> order(g.node_count());
  for (graph::NodeIndex i = 0; i < g.node_count(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&g](graph::NodeIndex a, graph::NodeIndex b) {
              return g.node(a).id < g.node(b).id;
            });
  nodes << "id,lat,lon,layer\n";
  for (const graph::NodeIndex i : order) {
    const graph::Node &n = g.node(i);
    nodes << n.id << ',' << format_double(n.pos.lat) << ','
          << format_double(n.pos.lon) << ',' << graph::layer_name(n.layer)
          << '\n';
  }
  edges << "src,dst,class,length_km\n";
  for (const graph::EdgeRecord &e : g.edges()) {
    edges << g.node(e.src).id << ',' << g.node(e.dst).id << ','
          << graph::edge_class_name(e.cls) << ',' << format_double(e.length_km)
          << '\n';
  }
}

void save_graph_files(const graph::MultilayerGraph &g,
                      const std::filesystem::path &nodes,
                      const std::filesystem::path &edges) {
  std::ofstream n = open_output(nodes);
  std::ofstream e = open_output(edges);
  save_graph(g, n, e);
}

std::vector<cell_net::TowerSite> load_towers(std::istream &in,
                                             const std::string &name) {
  CsvReader reader(in, name, {"id,lat,lon"});
  std::vector<cell_net::TowerSite> out;
  Row row;
  while (reader.next(row)) {
    const double lat = parse_double_field(reader, row, row.fields[1], "lat");
    const double lon = parse_double_field(reader, row, row.fields[2], "lon");
    if (row.fields[0].empty()) {
      throw ParseError(name, row.line, "empty tower id");
    }
    out.push_back({row.fields[0], {lat, lon}});
  }
  return out;
}

std::vector<cell_net::TowerSite> load_towers_file(
    const std::filesystem::path &path) {
  std::ifstream in = open_input(path);
  return load_towers(in, path.string());
}

void save_towers(const std::vector<cell_net::TowerSite> &sites,
                 std::ostream &out) {
  std::vector<const cell_net::TowerSite *> order;
  order.reserve(sites.size());
  for (const auto &s : sites) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const cell_net::TowerSite *a, const cell_net::TowerSite *b) {
              return a->id < b->id;
            });
  out << "id,lat,lon\n";
  for (const cell_net::TowerSite *s : order) {
    out << s->id << ',' << format_double(s->pos.lat) << ','
        << format_double(s->pos.lon) << '\n';
  }
}

void save_towers_file(const std::vector<cell_net::TowerSite> &sites,
                      const std::filesystem::path &path) {
  std::ofstream out = open_output(path);
  save_towers(sites, out);
}

void save_voronoi(const cell_net::CellularNetwork &net, std::ostream &out) {
  std::vector<cell_net::TowerIndex> order(net.tower_count());
  for (cell_net::TowerIndex i = 0; i < net.tower_count(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&net](cell_net::TowerIndex a, cell_net::TowerIndex b) {
              return net.tower(a).id < net.tower(b).id;
            });
  out << "id,r_max,vertex_list\n";
  for (const cell_net::TowerIndex i : order) {
    out << net.tower(i).id << ',' << format_double(net.tower(i).r_max) << ',';
    const auto &poly = net.cell_polygon(i);
    for (size_t k = 0; k < poly.size(); ++k) {
      if (k) out << "; ";
      out << format_double(poly[k].lon) << ' ' << format_double(poly[k].lat);
    }
    out << '\n';
  }
}

std::vector<mapper::CellularTrajectory> load_trajectories(
    std::istream &in, const std::string &name) {
  CsvReader reader(in, name, {"trajectory_id,timestamp,tower_id"});
  std::vector<mapper::CellularTrajectory> out;
  read_groups(reader, [&](const std::string &id, const std::vector<Row> &rows) {
    if (rows.size() < 2) {
      throw ParseError(name, rows.back().line,
                       "trajectory " + id + " has fewer than 2 observations");
    }
    mapper::CellularTrajectory traj;
    traj.trajectory_id = id;
    int64_t prev_ts = 0;
    for (size_t k = 0; k < rows.size(); ++k) {
      const Row &row = rows[k];
      const int64_t ts =
          parse_int_field(reader, row, row.fields[1], "timestamp");
      if (k > 0 && ts <= prev_ts) {
        throw ParseError(name, row.line,
                         "timestamps of trajectory " + id +
                             " must be strictly increasing");
      }
      prev_ts = ts;
      if (row.fields[2].empty()) {
        throw ParseError(name, row.line, "empty tower_id");
      }
      traj.observations.push_back({ts, row.fields[2]});
    }
    out.push_back(std::move(traj));
  });
  return out;
}

std::vector<mapper::CellularTrajectory> load_trajectories_file(
    const std::filesystem::path &path) {
  std::ifstream in = open_input(path);
  return load_trajectories(in, path.string());
}

void save_trajectories(const std::vector<mapper::CellularTrajectory> &trajs,
                       std::ostream &out) {
  std::vector<const mapper::CellularTrajectory *> order;
  order.reserve(trajs.size());
  for (const auto &t : trajs) order.push_back(&t);
  std::sort(order.begin(), order.end(),
            [](const mapper::CellularTrajectory *a,
               const mapper::CellularTrajectory *b) {
              return a->trajectory_id < b->trajectory_id;
            });
  out << "trajectory_id,timestamp,tower_id\n";
  for (const auto *t : order) {
    for (const auto &o : t->observations) {
      out << t->trajectory_id << ',' << o.timestamp << ',' << o.tower_id
          << '\n';
    }
  }
}

void save_trajectories_file(
    const std::vector<mapper::CellularTrajectory> &trajs,
    const std::filesystem::path &path) {
  std::ofstream out = open_output(path);
  save_trajectories(trajs, out);
}

std::vector<eval::GroundTruth> load_truths(std::istream &in,
                                           const graph::MultilayerGraph &g,
                                           const std::string &name) {
  CsvReader reader(in, name,
                   {"trajectory_id,seq_index,node_id",
                    "trajectory_id,seq_index,lat,lon"});
  const bool node_based = reader.header_index() == 0;
  std::vector<eval::GroundTruth> out;
  read_groups(reader, [&](const std::string &id, const std::vector<Row> &rows) {
    eval::GroundTruth truth;
    truth.trajectory_id = id;
    for (size_t k = 0; k < rows.size(); ++k) {
      const Row &row = rows[k];
      const int64_t seq =
          parse_int_field(reader, row, row.fields[1], "seq_index");
      if (seq != int64_t(k)) {
        throw ParseError(name, row.line,
                         "seq_index of trajectory " + id +
                             " must count up from 0");
      }
      if (node_based) {
        graph::NodeIndex idx;
        try {
          idx = g.index_of(row.fields[2]);
        } catch (const std::out_of_range &e) {
          throw ParseError(name, row.line, e.what());
        }
        if (!truth.nodes.empty() && !g.has_edge(truth.nodes.back(), idx)) {
          throw ParseError(name, row.line,
                           "truth nodes " + g.node(truth.nodes.back()).id +
                               " and " + row.fields[2] +
                               " are not adjacent in the graph");
        }
        truth.nodes.push_back(idx);
      } else {
        const double lat =
            parse_double_field(reader, row, row.fields[2], "lat");
        const double lon =
            parse_double_field(reader, row, row.fields[3], "lon");
        if (!geo::valid_coordinates({lat, lon})) {
          throw ParseError(name, row.line, "coordinates out of range");
        }
        truth.gps_points.push_back({lat, lon});
      }
    }
    out.push_back(std::move(truth));
  });
  return out;
}

std::vector<eval::GroundTruth> load_truths_file(
    const std::filesystem::path &path, const graph::MultilayerGraph &g) {
  std::ifstream in = open_input(path);
  return load_truths(in, g, path.string());
}

void save_truths(const std::vector<eval::GroundTruth> &truths,
                 const graph::MultilayerGraph &g, std::ostream &out) {
  bool node_based = true;
  for (const auto &t : truths) {
    if (t.nodes.empty() && !t.gps_points.empty()) node_based = false;
  }
  for (const auto &t : truths) {
    const bool this_node_based = !t.nodes.empty() || t.gps_points.empty();
    if (this_node_based != node_based) {
      throw std::invalid_argument(
          "cannot mix node-based and GPS ground truths in one file");
    }
  }
  std::vector<const eval::GroundTruth *> order;
  order.reserve(truths.size());
  for (const auto &t : truths) order.push_back(&t);
  std::sort(order.begin(), order.end(),
            [](const eval::GroundTruth *a, const eval::GroundTruth *b) {
              return a->trajectory_id < b->trajectory_id;
            });
  if (node_based) {
    out << "trajectory_id,seq_index,node_id\n";
    for (const auto *t : order) {
      for (size_t k = 0; k < t->nodes.size(); ++k) {
        out << t->trajectory_id << ',' << k << ',' << g.node(t->nodes[k]).id
            << '\n';
      }
    }
  } else {
    out << "trajectory_id,seq_index,lat,lon\n";
    for (const auto *t : order) {
      for (size_t k = 0; k < t->gps_points.size(); ++k) {
        out << t->trajectory_id << ',' << k << ','
            << format_double(t->gps_points[k].lat) << ','
            << format_double(t->gps_points[k].lon) << '\n';
      }
    }
  }
}

void save_truths_file(const std::vector<eval::GroundTruth> &truths,
                      const graph::MultilayerGraph &g,
                      const std::filesystem::path &path) {
  std::ofstream out = open_output(path);
  save_truths(truths, g, out);
}

std::vector<mapper::CompletePath> load_paths(std::istream &in,
                                             const graph::MultilayerGraph &g,
                                             const std::string &name) {
  CsvReader reader(in, name, {"trajectory_id,seq_index,node_id,is_skeleton"});
  std::vector<mapper::CompletePath> out;
  read_groups(reader, [&](const std::string &id, const std::vector<Row> &rows) {
    mapper::CompletePath path;
    path.trajectory_id = id;
    for (size_t k = 0; k < rows.size(); ++k) {
      const Row &row = rows[k];
      const int64_t seq =
          parse_int_field(reader, row, row.fields[1], "seq_index");
      if (seq != int64_t(k)) {
        throw ParseError(name, row.line,
                         "seq_index of trajectory " + id +
                             " must count up from 0");
      }
      graph::NodeIndex idx;
      try {
        idx = g.index_of(row.fields[2]);
      } catch (const std::out_of_range &e) {
        throw ParseError(name, row.line, e.what());
      }
      if (!path.nodes.empty() && !g.has_edge(path.nodes.back(), idx)) {
        throw ParseError(name, row.line,
                         "path nodes " + g.node(path.nodes.back()).id +
                             " and " + row.fields[2] +
                             " are not adjacent in the graph");
      }
      if (row.fields[3] == "1") {
        path.skeleton_indices.push_back(k);
      } else if (row.fields[3] != "0") {
        throw ParseError(name, row.line,
                         "is_skeleton must be 0 or 1, got `" + row.fields[3] +
                             "`");
      }
      path.nodes.push_back(idx);
    }
    out.push_back(std::move(path));
  });
  return out;
}

std::vector<mapper::CompletePath> load_paths_file(
    const std::filesystem::path &path, const graph::MultilayerGraph &g) {
  std::ifstream in = open_input(path);
  return load_paths(in, g, path.string());
}

void save_paths(const std::vector<mapper::CompletePath> &paths,
                const graph::MultilayerGraph &g, std::ostream &out) {
  std::vector<const mapper::CompletePath *> order;
  order.reserve(paths.size());
  for (const auto &p : paths) {
    if (!p.failed) order.push_back(&p);
  }
  std::sort(order.begin(), order.end(),
            [](const mapper::CompletePath *a, const mapper::CompletePath *b) {
              return a->trajectory_id < b->trajectory_id;
            });
  out << "trajectory_id,seq_index,node_id,is_skeleton\n";
  for (const auto *p : order) {
    for (size_t k = 0; k < p->nodes.size(); ++k) {
      const bool skeleton =
          std::binary_search(p->skeleton_indices.begin(),
                             p->skeleton_indices.end(), k);
      out << p->trajectory_id << ',' << k << ',' << g.node(p->nodes[k]).id
          << ',' << (skeleton ? '1' : '0') << '\n';
    }
  }
}

void save_paths_file(const std::vector<mapper::CompletePath> &paths,
                     const graph::MultilayerGraph &g,
                     const std::filesystem::path &path) {
  std::ofstream out = open_output(path);
  save_paths(paths, g, out);
}

std::string file_digest(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  uint64_t hash = 14695981039346656037ULL;
  char buf[1 << 16];
  for (;;) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= uint64_t(uint8_t(buf[i]));
      hash *= 1099511628211ULL;
    }
    if (got < std::streamsize(sizeof(buf))) break;
  }
  static const char *hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[size_t(i)] = hex[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

}  // namespace ctmap::io
