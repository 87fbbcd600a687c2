#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

#include "ctmap/graph.hpp"
#include "ctmap/rng.hpp"
#include "oracles.hpp"

using namespace ctmap;
using graph::EdgeClass;
using graph::Layer;
using graph::MultilayerGraph;
using graph::NodeIndex;

namespace {

// a -- b -- c road chain with 2 km and 1 km local edges.
MultilayerGraph three_chain() {
  MultilayerGraph g;
  g.add_node("a", {48.80, 2.30}, Layer::Road);
  g.add_node("b", {48.82, 2.30}, Layer::Road);
  g.add_node("c", {48.83, 2.30}, Layer::Road);
  g.add_edge("a", "b", EdgeClass::RoadLocal, 2.0);
  g.add_edge("b", "c", EdgeClass::RoadLocal, 1.0);
  return g;
}

}  // namespace

TEST_CASE("edge class weights follow the speed table") {
  CHECK(graph::edge_class_weight(EdgeClass::Metro) == 1.0 / 80.0);
  CHECK(graph::edge_class_weight(EdgeClass::RoadHighway) == 1.0 / 90.0);
  CHECK(graph::edge_class_weight(EdgeClass::RoadPrincipal) == 1.0 / 60.0);
  CHECK(graph::edge_class_weight(EdgeClass::RoadRegional) == 1.0 / 40.0);
  CHECK(graph::edge_class_weight(EdgeClass::RoadLocal) == 1.0 / 30.0);
  CHECK(graph::edge_class_weight(EdgeClass::Crosslayer) == 1.0 / 10.0);
  CHECK(graph::edge_class_weight(EdgeClass::Train) == 1.0 / 100.0);
}

TEST_CASE("layer and edge class names round-trip") {
  for (const Layer l : {Layer::Road, Layer::Metro, Layer::Train}) {
    CHECK(graph::parse_layer(graph::layer_name(l)) == l);
  }
  for (const EdgeClass c :
       {EdgeClass::Metro, EdgeClass::RoadHighway, EdgeClass::RoadPrincipal,
        EdgeClass::RoadRegional, EdgeClass::RoadLocal, EdgeClass::Crosslayer,
        EdgeClass::Train}) {
    CHECK(graph::parse_edge_class(graph::edge_class_name(c)) == c);
  }
  CHECK_THROWS_AS(graph::parse_layer("bus"), std::invalid_argument);
  CHECK_THROWS_AS(graph::parse_edge_class("ferry"), std::invalid_argument);
}

TEST_CASE("a local road edge carries weight 1/30") {
  MultilayerGraph g;
  g.add_node("a", {48.80, 2.30}, Layer::Road);
  g.add_node("b", {48.81, 2.30}, Layer::Road);
  g.add_edge("a", "b", EdgeClass::RoadLocal, 1.0);
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);
  const graph::HalfEdge *e = g.edge_between(0, 1);
  REQUIRE(e != nullptr);
  CHECK(e->weight == 1.0 / 30.0);
  CHECK(e->length_km == 1.0);
}

TEST_CASE("duplicate node ids are rejected") {
  MultilayerGraph g;
  g.add_node("a", {48.80, 2.30}, Layer::Road);
  CHECK_THROWS_WITH_AS(g.add_node("a", {48.81, 2.30}, Layer::Road),
                       "duplicate node id: a", std::invalid_argument);
}

TEST_CASE("out-of-range coordinates are rejected") {
  MultilayerGraph g;
  CHECK_THROWS_AS(g.add_node("a", {91.0, 0.0}, Layer::Road),
                  std::invalid_argument);
}

TEST_CASE("unknown node id lookups throw and find returns empty") {
  MultilayerGraph g;
  g.add_node("a", {48.80, 2.30}, Layer::Road);
  CHECK_THROWS_WITH_AS(g.index_of("z"), "unknown node id: z",
                       std::out_of_range);
  CHECK_FALSE(g.find("z").has_value());
  CHECK(g.find("a").has_value());
}

TEST_CASE("edge class must match the endpoint layers") {
  MultilayerGraph g;
  g.add_node("r", {48.80, 2.30}, Layer::Road);
  g.add_node("m", {48.81, 2.30}, Layer::Metro);
  g.add_node("m2", {48.82, 2.30}, Layer::Metro);
  // metro class between road and metro endpoints
  CHECK_THROWS_AS(g.add_edge("r", "m", EdgeClass::Metro),
                  std::invalid_argument);
  // crosslayer class within one layer
  CHECK_THROWS_AS(g.add_edge("m", "m2", EdgeClass::Crosslayer),
                  std::invalid_argument);
  g.add_edge("r", "m", EdgeClass::Crosslayer);
  g.add_edge("m", "m2", EdgeClass::Metro, 0.8);
  CHECK(g.edge_count() == 2);
}

TEST_CASE("self loops duplicate edges and bad lengths are rejected") {
  MultilayerGraph g;
  g.add_node("a", {48.80, 2.30}, Layer::Road);
  g.add_node("b", {48.81, 2.30}, Layer::Road);
  g.add_edge("a", "b", EdgeClass::RoadLocal, 1.0);
  CHECK_THROWS_AS(g.add_edge("a", "a", EdgeClass::RoadLocal, 1.0),
                  std::invalid_argument);
  // the message echoes the endpoints as given, not canonicalized
  CHECK_THROWS_WITH_AS(g.add_edge("b", "a", EdgeClass::RoadLocal, 1.0),
                       "duplicate edge b-a", std::invalid_argument);
  CHECK_THROWS_AS(g.add_edge("a", "b", EdgeClass::RoadLocal, 0.0),
                  std::invalid_argument);
}

TEST_CASE("omitted edge length defaults to the geodesic distance") {
  MultilayerGraph g;
  const NodeIndex a = g.add_node("a", {48.80, 2.30}, Layer::Road);
  const NodeIndex b = g.add_node("b", {48.81, 2.30}, Layer::Road);
  g.add_edge(a, b, EdgeClass::RoadLocal);
  const graph::HalfEdge *e = g.edge_between(a, b);
  REQUIRE(e != nullptr);
  CHECK(e->length_km ==
        doctest::Approx(graph::geodesic_distance(g.node(a).pos, g.node(b).pos))
            .epsilon(1e-12));
}

TEST_CASE("degree counts incident edges across layers") {
  MultilayerGraph g = three_chain();
  CHECK(g.degree("a") == 1);
  CHECK(g.degree("b") == 2);
  CHECK(g.degree("c") == 1);
  g.add_node("m", {48.82, 2.301}, Layer::Metro);
  CHECK(g.degree("m") == 0);  // isolated until connected
  g.add_edge("b", "m", EdgeClass::Crosslayer);
  CHECK(g.degree("b") == 3);
  CHECK(g.degree("m") == 1);
}

TEST_CASE("shortest path on a chain sums weighted lengths") {
  MultilayerGraph g = three_chain();
  const auto sp = graph::shortest_path(g, "a", "c");
  REQUIRE(sp.has_value());
  CHECK(sp->cost == doctest::Approx(0.1).epsilon(1e-12));  // 3 km / 30 km/h
  CHECK(oracles::id_sequence(g, sp->path) ==
        std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("shortest path of a node to itself is the node alone at zero cost") {
  MultilayerGraph g = three_chain();
  const auto sp = graph::shortest_path(g, "a", "a");
  REQUIRE(sp.has_value());
  CHECK(sp->cost == 0.0);
  CHECK(oracles::id_sequence(g, sp->path) == std::vector<std::string>{"a"});
}

TEST_CASE("unreachable pairs yield no path") {
  MultilayerGraph g;
  g.add_node("a", {48.80, 2.30}, Layer::Road);
  g.add_node("b", {48.81, 2.30}, Layer::Road);
  g.add_node("c", {48.82, 2.30}, Layer::Road);
  g.add_edge("a", "b", EdgeClass::RoadLocal, 1.0);
  CHECK_FALSE(graph::shortest_path(g, "a", "c").has_value());
  const auto costs = graph::shortest_path_costs(g, 0, graph::CostModel::Weighted);
  CHECK(costs[2] == std::numeric_limits<double>::infinity());
  CHECK_FALSE(g.connected());
}

TEST_CASE("dijkstra agrees with exhaustive path enumeration") {
  rng::Rng master(2024);
  for (int trial = 0; trial < 40; ++trial) {
    rng::Rng r = master.split(trial);
    const size_t n = 4 + r.below(5);  // 4..8 nodes
    MultilayerGraph g = oracles::random_road_graph(r, n, n);
    for (const graph::CostModel model :
         {graph::CostModel::Weighted, graph::CostModel::Hops}) {
      for (NodeIndex s = 0; s < g.node_count(); ++s) {
        for (NodeIndex t = 0; t < g.node_count(); ++t) {
          const auto got = graph::shortest_path(g, s, t, model);
          const auto want = oracles::exhaustive_shortest_path(g, s, t, model);
          REQUIRE(got.has_value() == want.has_value());
          if (!got) continue;
          CHECK(got->cost == doctest::Approx(want->cost).epsilon(1e-9));
          CHECK(got->path.front() == s);
          CHECK(got->path.back() == t);
          for (size_t i = 1; i < got->path.size(); ++i) {
            CHECK(g.has_edge(got->path[i - 1], got->path[i]));
          }
        }
      }
    }
  }
}

TEST_CASE("equal-cost ties pick the lexicographically smallest path") {
  // Unit square: two equal-cost routes a->d, via b or via c.
  MultilayerGraph g;
  g.add_node("a", {48.80, 2.30}, Layer::Road);
  g.add_node("b", {48.81, 2.30}, Layer::Road);
  g.add_node("c", {48.80, 2.31}, Layer::Road);
  g.add_node("d", {48.81, 2.31}, Layer::Road);
  g.add_edge("a", "b", EdgeClass::RoadLocal, 1.0);
  g.add_edge("a", "c", EdgeClass::RoadLocal, 1.0);
  g.add_edge("b", "d", EdgeClass::RoadLocal, 1.0);
  g.add_edge("c", "d", EdgeClass::RoadLocal, 1.0);
  const auto sp = graph::shortest_path(g, "a", "d");
  REQUIRE(sp.has_value());
  CHECK(oracles::id_sequence(g, sp->path) ==
        std::vector<std::string>{"a", "b", "d"});
  const auto want = oracles::exhaustive_shortest_path(
      g, g.index_of("a"), g.index_of("d"), graph::CostModel::Weighted);
  CHECK(oracles::id_sequence(g, want->path) ==
        std::vector<std::string>{"a", "b", "d"});
}

TEST_CASE("shortest path cost is symmetric and obeys the triangle inequality") {
  rng::Rng r(99);
  MultilayerGraph g = oracles::random_road_graph(r, 10, 12);
  std::vector<std::vector<double>> cost(g.node_count());
  for (NodeIndex s = 0; s < g.node_count(); ++s) {
    cost[s] = graph::shortest_path_costs(g, s, graph::CostModel::Weighted);
  }
  for (NodeIndex a = 0; a < g.node_count(); ++a) {
    for (NodeIndex b = 0; b < g.node_count(); ++b) {
      CHECK(cost[a][b] == doctest::Approx(cost[b][a]).epsilon(1e-12));
      for (NodeIndex c = 0; c < g.node_count(); ++c) {
        CHECK(cost[a][c] <= cost[a][b] + cost[b][c] + 1e-9);
      }
    }
  }
}

TEST_CASE("connect_layers links stations to nearby road nodes") {
  MultilayerGraph g;
  g.add_node("r1", {48.8000, 2.3000}, Layer::Road);
  g.add_node("r2", {48.8100, 2.3000}, Layer::Road);
  g.add_node("m1", {48.8004, 2.3000}, Layer::Metro);  // ~45 m from r1
  g.add_node("m9", {48.9000, 2.5000}, Layer::Metro);  // far from everything
  const auto report = graph::connect_layers(g, 0.2);
  CHECK(report.edges_added == 1);
  REQUIRE(report.unconnected_stations.size() == 1);
  CHECK(report.unconnected_stations[0] == "m9");
  const graph::HalfEdge *e = g.edge_between(g.index_of("m1"), g.index_of("r1"));
  REQUIRE(e != nullptr);
  CHECK(e->cls == EdgeClass::Crosslayer);
  CHECK(e->weight == 1.0 / 10.0);

  // idempotent: a second pass adds nothing
  const auto again = graph::connect_layers(g, 0.2);
  CHECK(again.edges_added == 0);
  CHECK(g.edge_count() == 1);
}

TEST_CASE("connect_layers rejects a non-positive radius") {
  MultilayerGraph g;
  g.add_node("r1", {48.80, 2.30}, Layer::Road);
  CHECK_THROWS_AS(graph::connect_layers(g, 0.0), std::invalid_argument);
}

TEST_CASE("crosslayer edge lengths have a positive floor") {
  MultilayerGraph g;
  g.add_node("r1", {48.8000, 2.3000}, Layer::Road);
  g.add_node("r2", {48.8100, 2.3000}, Layer::Road);
  g.add_node("m1", {48.8000001, 2.3000}, Layer::Metro);  // ~1 cm away
  graph::connect_layers(g, 0.2);
  const graph::HalfEdge *e = g.edge_between(g.index_of("m1"), g.index_of("r1"));
  REQUIRE(e != nullptr);
  CHECK(e->length_km >= 0.01);
}

TEST_CASE("layer views partition the edge set") {
  MultilayerGraph g = three_chain();
  g.add_node("m1", {48.801, 2.30}, Layer::Metro);
  g.add_node("m2", {48.811, 2.30}, Layer::Metro);
  g.add_edge("m1", "m2", EdgeClass::Metro, 0.8);
  graph::connect_layers(g, 0.2);

  size_t internal = 0;
  for (const Layer l : {Layer::Road, Layer::Metro, Layer::Train}) {
    internal += graph::layer_stats(g, l).edges;
  }
  CHECK(internal + graph::crosslayer_edge_count(g) == g.edge_count());

  const MultilayerGraph metro = g.layer_subgraph(Layer::Metro);
  CHECK(metro.node_count() == 2);
  CHECK(metro.edge_count() == 1);
  CHECK(graph::layer_stats(g, Layer::Metro).mean_degree == doctest::Approx(1.0));
  CHECK(graph::layer_stats(g, Layer::Metro).mean_edge_length_km ==
        doctest::Approx(0.8));
}

TEST_CASE("edges listing is sorted and covers each edge once") {
  rng::Rng r(5);
  MultilayerGraph g = oracles::random_road_graph(r, 8, 8);
  const auto edges = g.edges();
  CHECK(edges.size() == g.edge_count());
  std::set<std::pair<std::string, std::string>> seen;
  for (size_t i = 0; i < edges.size(); ++i) {
    const std::string s = g.node(edges[i].src).id;
    const std::string d = g.node(edges[i].dst).id;
    CHECK(s <= d);
    CHECK(seen.insert({s, d}).second);
    if (i > 0) {
      const auto prev = std::make_pair(g.node(edges[i - 1].src).id,
                                       g.node(edges[i - 1].dst).id);
      CHECK(prev < std::make_pair(s, d));
    }
  }
}

TEST_CASE("nearest node and radius queries match a brute-force scan") {
  rng::Rng r(31);
  MultilayerGraph g = oracles::random_road_graph(r, 12, 6);
  for (int probe = 0; probe < 25; ++probe) {
    const geo::LatLon p{48.8 + r.uniform(0.0, 0.08), 2.3 + r.uniform(0.0, 0.08)};

    NodeIndex best = graph::kInvalidNode;
    double best_d = std::numeric_limits<double>::infinity();
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
      const double d = geo::distance_km(p, g.node(i).pos);
      if (d < best_d || (d == best_d && best != graph::kInvalidNode &&
                         g.node(i).id < g.node(best).id)) {
        best_d = d;
        best = i;
      }
    }
    CHECK(g.nearest_node(p) == best);

    const double radius = r.uniform(0.5, 4.0);
    const auto got = g.nodes_near(p, radius);
    std::vector<NodeIndex> want;
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
      if (geo::distance_km(p, g.node(i).pos) <= radius) want.push_back(i);
    }
    std::sort(want.begin(), want.end(), [&](NodeIndex a, NodeIndex b) {
      const double da = geo::distance_km(p, g.node(a).pos);
      const double db = geo::distance_km(p, g.node(b).pos);
      if (da != db) return da < db;
      return g.node(a).id < g.node(b).id;
    });
    CHECK(got == want);
  }
}

TEST_CASE("nearest node on an empty graph is the invalid sentinel") {
  MultilayerGraph g;
  CHECK(g.nearest_node({48.8, 2.3}) == graph::kInvalidNode);
}
