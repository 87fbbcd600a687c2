#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmap/cell_net.hpp"
#include "ctmap/eval.hpp"
#include "ctmap/geo.hpp"
#include "ctmap/graph.hpp"
#include "ctmap/io.hpp"
#include "ctmap/mapper.hpp"

using namespace ctmap;
using graph::EdgeClass;
using graph::Layer;
using graph::MultilayerGraph;
using graph::NodeIndex;

namespace {

MultilayerGraph sample_graph() {
  MultilayerGraph g;
  g.add_node("a", {48.85, 2.35}, Layer::Road);
  g.add_node("b", {48.86, 2.35}, Layer::Road);
  g.add_node("c", {48.87, 2.35}, Layer::Road);
  g.add_node("m1", {48.855, 2.351}, Layer::Metro);
  g.add_node("m2", {48.865, 2.351}, Layer::Metro);
  g.add_edge("a", "b", EdgeClass::RoadLocal, 1.2);
  g.add_edge("b", "c", EdgeClass::RoadRegional);  // geodesic length
  g.add_edge("m1", "m2", EdgeClass::Metro, 1.1);
  g.add_edge("a", "m1", EdgeClass::Crosslayer, 0.12);
  return g;
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ctmap_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path &p, const std::string &content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("graphs survive a save and load round trip") {
  const MultilayerGraph g = sample_graph();
  std::ostringstream nodes_out, edges_out;
  io::save_graph(g, nodes_out, edges_out);

  std::istringstream nodes_in(nodes_out.str()), edges_in(edges_out.str());
  const MultilayerGraph h = io::load_graph(nodes_in, edges_in);

  REQUIRE(h.node_count() == g.node_count());
  REQUIRE(h.edge_count() == g.edge_count());
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    const auto &n = g.node(i);
    const NodeIndex j = h.index_of(n.id);
    CHECK(h.node(j).pos.lat == n.pos.lat);  // exact: shortest round-trip text
    CHECK(h.node(j).pos.lon == n.pos.lon);
    CHECK(h.node(j).layer == n.layer);
  }
  const auto ge = g.edges(), he = h.edges();
  REQUIRE(ge.size() == he.size());
  for (size_t k = 0; k < ge.size(); ++k) {
    CHECK(g.node(ge[k].src).id == h.node(he[k].src).id);
    CHECK(g.node(ge[k].dst).id == h.node(he[k].dst).id);
    CHECK(ge[k].cls == he[k].cls);
    CHECK(ge[k].length_km == he[k].length_km);
  }

  // a second save of the reloaded graph is byte identical
  std::ostringstream nodes2, edges2;
  io::save_graph(h, nodes2, edges2);
  CHECK(nodes2.str() == nodes_out.str());
  CHECK(edges2.str() == edges_out.str());
}

TEST_CASE("an omitted edge length falls back to the geodesic distance") {
  std::istringstream nodes("id,lat,lon,layer\n"
                           "a,48.85,2.35,road\n"
                           "b,48.86,2.35,road\n");
  std::istringstream edges("src,dst,class,length_km\n"
                           "a,b,road_local,\n");
  const MultilayerGraph g = io::load_graph(nodes, edges);
  const auto e = g.edges();
  REQUIRE(e.size() == 1);
  CHECK(e[0].length_km ==
        doctest::Approx(geo::distance_km({48.85, 2.35}, {48.86, 2.35})));
}

TEST_CASE("graph loading reports malformed input with file and line") {
  SUBCASE("wrong header") {
    std::istringstream nodes("id,lat,lon\n");
    std::istringstream edges("src,dst,class,length_km\n");
    CHECK_THROWS_WITH_AS(
        io::load_graph(nodes, edges, "n.csv", "e.csv"),
        "n.csv:1: expected header `id,lat,lon,layer`, got `id,lat,lon`",
        io::ParseError);
  }
  SUBCASE("missing header") {
    std::istringstream nodes("# only a comment\n");
    std::istringstream edges("");
    CHECK_THROWS_WITH_AS(io::load_graph(nodes, edges, "n.csv", "e.csv"),
                         "n.csv:2: missing header line", io::ParseError);
  }
  SUBCASE("bad number, counting comment lines") {
    std::istringstream nodes("# generated\n"
                             "\n"
                             "id,lat,lon,layer\n"
                             "a,48.85,2.35,road\n"
                             "b,oops,2.35,road\n");
    std::istringstream edges("src,dst,class,length_km\n");
    CHECK_THROWS_WITH_AS(io::load_graph(nodes, edges, "n.csv", "e.csv"),
                         "n.csv:5: invalid lat: `oops`", io::ParseError);
  }
  SUBCASE("wrong field count") {
    std::istringstream nodes("id,lat,lon,layer\n"
                             "a,48.85,2.35\n");
    std::istringstream edges("src,dst,class,length_km\n");
    CHECK_THROWS_WITH_AS(io::load_graph(nodes, edges, "n.csv", "e.csv"),
                         "n.csv:2: expected 4 fields, got 3", io::ParseError);
  }
  SUBCASE("duplicate node") {
    std::istringstream nodes("id,lat,lon,layer\n"
                             "a,48.85,2.35,road\n"
                             "a,48.86,2.35,road\n");
    std::istringstream edges("src,dst,class,length_km\n");
    CHECK_THROWS_WITH_AS(io::load_graph(nodes, edges, "n.csv", "e.csv"),
                         "n.csv:3: duplicate node id: a", io::ParseError);
  }
  SUBCASE("dangling edge endpoint") {
    std::istringstream nodes("id,lat,lon,layer\n"
                             "a,48.85,2.35,road\n"
                             "b,48.86,2.35,road\n");
    std::istringstream edges("src,dst,class,length_km\n"
                             "a,z,road_local,1.0\n");
    CHECK_THROWS_WITH_AS(io::load_graph(nodes, edges, "n.csv", "e.csv"),
                         "e.csv:2: unknown node id: z", io::ParseError);
  }
  SUBCASE("unknown edge class") {
    std::istringstream nodes("id,lat,lon,layer\n"
                             "a,48.85,2.35,road\n"
                             "b,48.86,2.35,road\n");
    std::istringstream edges("src,dst,class,length_km\n"
                             "a,b,tram,1.0\n");
    CHECK_THROWS_AS(io::load_graph(nodes, edges, "n.csv", "e.csv"),
                    io::ParseError);
  }
}

TEST_CASE("tower lists round trip and validate") {
  std::vector<cell_net::TowerSite> sites = {
      {"t2", {48.86, 2.36}},
      {"t1", {48.85, 2.35}},
  };
  std::ostringstream out;
  io::save_towers(sites, out);

  std::istringstream in(out.str());
  const auto loaded = io::load_towers(in);
  REQUIRE(loaded.size() == 2);
  // writer sorts by id
  CHECK(loaded[0].id == "t1");
  CHECK(loaded[1].id == "t2");
  CHECK(loaded[0].pos.lat == 48.85);
  CHECK(loaded[1].pos.lon == 2.36);

  std::istringstream bad("id,lat,lon\n"
                         ",48.85,2.35\n");
  CHECK_THROWS_WITH_AS(io::load_towers(bad, "tw.csv"),
                       "tw.csv:2: empty tower id", io::ParseError);
  std::istringstream bad_lon("id,lat,lon\n"
                             "t1,48.85,east\n");
  CHECK_THROWS_WITH_AS(io::load_towers(bad_lon, "tw.csv"),
                       "tw.csv:2: invalid lon: `east`", io::ParseError);
}

TEST_CASE("trajectories keep their grouping and ordering rules") {
  std::vector<mapper::CellularTrajectory> trajs(2);
  trajs[0].trajectory_id = "t2";
  trajs[0].observations = {{0, "a1"}, {900, "a2"}};
  trajs[1].trajectory_id = "t1";
  trajs[1].observations = {{10, "a3"}, {400, "a1"}, {1300, "a3"}};

  std::ostringstream out;
  io::save_trajectories(trajs, out);
  std::istringstream in(out.str());
  const auto loaded = io::load_trajectories(in);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].trajectory_id == "t1");  // writer sorts by id
  REQUIRE(loaded[0].observations.size() == 3);
  CHECK(loaded[0].observations[1].timestamp == 400);
  CHECK(loaded[0].observations[1].tower_id == "a1");
  CHECK(loaded[1].trajectory_id == "t2");

  SUBCASE("interleaved groups are rejected") {
    std::istringstream bad("trajectory_id,timestamp,tower_id\n"
                           "t1,0,a1\n"
                           "t1,900,a2\n"
                           "t2,0,a1\n"
                           "t2,900,a3\n"
                           "t1,1800,a2\n");
    CHECK_THROWS_WITH_AS(io::load_trajectories(bad, "tr.csv"),
                         "tr.csv:6: trajectory t1 reappears after other "
                         "trajectories; rows must be grouped",
                         io::ParseError);
  }
  SUBCASE("a single observation is not a trajectory") {
    std::istringstream bad("trajectory_id,timestamp,tower_id\n"
                           "t1,0,a1\n");
    CHECK_THROWS_WITH_AS(io::load_trajectories(bad, "tr.csv"),
                         "tr.csv:2: trajectory t1 has fewer than 2 observations",
                         io::ParseError);
  }
  SUBCASE("timestamps must strictly increase") {
    std::istringstream bad("trajectory_id,timestamp,tower_id\n"
                           "t1,0,a1\n"
                           "t1,0,a2\n");
    CHECK_THROWS_WITH_AS(
        io::load_trajectories(bad, "tr.csv"),
        "tr.csv:3: timestamps of trajectory t1 must be strictly increasing",
        io::ParseError);
  }
  SUBCASE("timestamps must be integers") {
    std::istringstream bad("trajectory_id,timestamp,tower_id\n"
                           "t1,zero,a1\n"
                           "t1,900,a2\n");
    CHECK_THROWS_WITH_AS(io::load_trajectories(bad, "tr.csv"),
                         "tr.csv:2: invalid timestamp: `zero`", io::ParseError);
  }
  SUBCASE("tower ids must be present") {
    std::istringstream bad("trajectory_id,timestamp,tower_id\n"
                           "t1,0,\n"
                           "t1,900,a2\n");
    CHECK_THROWS_WITH_AS(io::load_trajectories(bad, "tr.csv"),
                         "tr.csv:2: empty tower_id", io::ParseError);
  }
}

TEST_CASE("node ground truths round trip and enforce adjacency") {
  const MultilayerGraph g = sample_graph();
  std::vector<eval::GroundTruth> truths(1);
  truths[0].trajectory_id = "t1";
  truths[0].nodes = {g.index_of("a"), g.index_of("b"), g.index_of("c")};

  std::ostringstream out;
  io::save_truths(truths, g, out);
  std::istringstream in(out.str());
  const auto loaded = io::load_truths(in, g);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].trajectory_id == "t1");
  CHECK(loaded[0].nodes == truths[0].nodes);
  CHECK(loaded[0].gps_points.empty());

  SUBCASE("non adjacent consecutive nodes are rejected") {
    std::istringstream bad("trajectory_id,seq_index,node_id\n"
                           "t1,0,a\n"
                           "t1,1,c\n");
    CHECK_THROWS_WITH_AS(
        io::load_truths(bad, g, "gt.csv"),
        "gt.csv:3: truth nodes a and c are not adjacent in the graph",
        io::ParseError);
  }
  SUBCASE("sequence indices count from zero") {
    std::istringstream bad("trajectory_id,seq_index,node_id\n"
                           "t1,0,a\n"
                           "t1,2,b\n");
    CHECK_THROWS_WITH_AS(
        io::load_truths(bad, g, "gt.csv"),
        "gt.csv:3: seq_index of trajectory t1 must count up from 0",
        io::ParseError);
  }
  SUBCASE("unknown nodes are flagged in place") {
    std::istringstream bad("trajectory_id,seq_index,node_id\n"
                           "t1,0,zz\n");
    CHECK_THROWS_WITH_AS(io::load_truths(bad, g, "gt.csv"),
                         "gt.csv:2: unknown node id: zz", io::ParseError);
  }
}

TEST_CASE("gps ground truths use the four column header") {
  const MultilayerGraph g = sample_graph();
  std::vector<eval::GroundTruth> truths(1);
  truths[0].trajectory_id = "g1";
  truths[0].gps_points = {{48.85, 2.35}, {48.852, 2.351}};

  std::ostringstream out;
  io::save_truths(truths, g, out);
  CHECK(out.str().rfind("trajectory_id,seq_index,lat,lon\n", 0) == 0);

  std::istringstream in(out.str());
  const auto loaded = io::load_truths(in, g);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].nodes.empty());
  REQUIRE(loaded[0].gps_points.size() == 2);
  CHECK(loaded[0].gps_points[1].lat == 48.852);

  SUBCASE("coordinates must be on the globe") {
    std::istringstream bad("trajectory_id,seq_index,lat,lon\n"
                           "g1,0,95.0,2.35\n");
    CHECK_THROWS_WITH_AS(io::load_truths(bad, g, "gt.csv"),
                         "gt.csv:2: coordinates out of range", io::ParseError);
  }
  SUBCASE("node and gps truths cannot share a file") {
    std::vector<eval::GroundTruth> mixed(2);
    mixed[0].trajectory_id = "n1";
    mixed[0].nodes = {g.index_of("a")};
    mixed[1].trajectory_id = "g1";
    mixed[1].gps_points = {{48.85, 2.35}};
    std::ostringstream sink;
    CHECK_THROWS_WITH_AS(io::save_truths(mixed, g, sink),
                         "cannot mix node-based and GPS ground truths in one file",
                         std::invalid_argument);
  }
}

TEST_CASE("mapped paths round trip with their skeleton flags") {
  const MultilayerGraph g = sample_graph();
  std::vector<mapper::CompletePath> paths(2);
  paths[0].trajectory_id = "p1";
  paths[0].nodes = {g.index_of("a"), g.index_of("b"), g.index_of("c")};
  paths[0].skeleton_indices = {0, 2};
  paths[1].trajectory_id = "p0_failed";
  paths[1].failed = true;
  paths[1].failure_reason = "whatever";

  std::ostringstream out;
  io::save_paths(paths, g, out);
  std::istringstream in(out.str());
  const auto loaded = io::load_paths(in, g);
  REQUIRE(loaded.size() == 1);  // failed mappings are not serialized
  CHECK(loaded[0].trajectory_id == "p1");
  CHECK(loaded[0].nodes == paths[0].nodes);
  CHECK(loaded[0].skeleton_indices == paths[0].skeleton_indices);
  CHECK_FALSE(loaded[0].failed);

  SUBCASE("skeleton flags are binary") {
    std::istringstream bad("trajectory_id,seq_index,node_id,is_skeleton\n"
                           "p1,0,a,2\n");
    CHECK_THROWS_WITH_AS(io::load_paths(bad, g, "pa.csv"),
                         "pa.csv:2: is_skeleton must be 0 or 1, got `2`",
                         io::ParseError);
  }
  SUBCASE("paths must walk along edges") {
    std::istringstream bad("trajectory_id,seq_index,node_id,is_skeleton\n"
                           "p1,0,a,1\n"
                           "p1,1,c,1\n");
    CHECK_THROWS_WITH_AS(
        io::load_paths(bad, g, "pa.csv"),
        "pa.csv:3: path nodes a and c are not adjacent in the graph",
        io::ParseError);
  }
}

TEST_CASE("repeated skeleton positions collapse to one flag") {
  // A stay-put trajectory maps to a single node mentioned twice in the
  // skeleton; the text format keeps one row and one flag.
  const MultilayerGraph g = sample_graph();
  std::vector<mapper::CompletePath> paths(1);
  paths[0].trajectory_id = "stay";
  paths[0].nodes = {g.index_of("a")};
  paths[0].skeleton_indices = {0, 0};

  std::ostringstream out;
  io::save_paths(paths, g, out);
  std::istringstream in(out.str());
  const auto loaded = io::load_paths(in, g);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].nodes == paths[0].nodes);
  CHECK(loaded[0].skeleton_indices == std::vector<size_t>{0});
}

TEST_CASE("voronoi exports list each cell with its radius") {
  const geo::LocalProjection proj(geo::LatLon{48.85, 2.35});
  std::vector<cell_net::TowerSite> sites = {
      {"t00", proj.to_latlon({-1.0, -1.0})},
      {"t01", proj.to_latlon({1.0, -1.0})},
      {"t02", proj.to_latlon({-1.0, 1.0})},
      {"t03", proj.to_latlon({1.0, 1.0})},
  };
  const geo::LatLon lo = proj.to_latlon({-2.0, -2.0});
  const geo::LatLon hi = proj.to_latlon({2.0, 2.0});
  const auto net =
      cell_net::build_network(sites, {lo.lat, lo.lon, hi.lat, hi.lon});

  std::ostringstream out;
  io::save_voronoi(net, out);
  std::istringstream lines(out.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "id,r_max,vertex_list");
  size_t rows = 0;
  while (std::getline(lines, line)) {
    CHECK(line.rfind("t0", 0) == 0);
    // id, r_max, then `; `-separated `lon lat` vertices
    const size_t c1 = line.find(',');
    const size_t c2 = line.find(',', c1 + 1);
    REQUIRE(c2 != std::string::npos);
    const double r = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    CHECK(std::count(line.begin() + long(c2), line.end(), ';') == 3);
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("doubles print with shortest exact round trip text") {
  for (const double v : {0.1, 1.0 / 3.0, 1e-12, 48.857623, -2.351, 0.0,
                         12345.6789, 1e300}) {
    const std::string s = io::format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("file digests are stable and content sensitive") {
  const auto dir = scratch_dir();
  const auto empty = dir / "empty.bin";
  write_file(empty, "");
  CHECK(io::file_digest(empty) == "cbf29ce484222325");

  const auto f1 = dir / "one.txt";
  const auto f2 = dir / "two.txt";
  write_file(f1, "node,48.85\n");
  write_file(f2, "node,48.85\n");
  CHECK(io::file_digest(f1) == io::file_digest(f2));
  CHECK(io::file_digest(f1).size() == 16);

  write_file(f2, "node,48.86\n");
  CHECK(io::file_digest(f1) != io::file_digest(f2));

  CHECK_THROWS_AS(io::file_digest(dir / "gone.txt"), std::runtime_error);
}

TEST_CASE("file based loaders mirror the stream loaders") {
  const auto dir = scratch_dir();
  const MultilayerGraph g = sample_graph();
  io::save_graph_files(g, dir / "nodes.csv", dir / "edges.csv");
  const MultilayerGraph h =
      io::load_graph_files(dir / "nodes.csv", dir / "edges.csv");
  CHECK(h.node_count() == g.node_count());
  CHECK(h.edge_count() == g.edge_count());

  CHECK_THROWS_AS(io::load_graph_files(dir / "missing.csv", dir / "edges.csv"),
                  std::runtime_error);

  // parse errors from files carry the path as the source name
  write_file(dir / "broken.csv", "id,lat\n");
  try {
    io::load_towers_file(dir / "broken.csv");
    FAIL("expected a parse error");
  } catch (const io::ParseError &e) {
    CHECK(std::string(e.what()).find("broken.csv:1:") != std::string::npos);
  }
}
