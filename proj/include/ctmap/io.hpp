/**
 * File formats and serialization.
 *
 * Everything is line-oriented UTF-8 text with a required header line;
 * `#` starts a comment line and blank lines are skipped. Parse errors
 * carry the source name and 1-based line number. Writers are
 * deterministic: records sorted, doubles printed with the shortest
 * round-trip representation.
 */

#ifndef CTMAP_IO_HPP
#define CTMAP_IO_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmap/cell_net.hpp"
#include "ctmap/eval.hpp"
#include "ctmap/graph.hpp"
#include "ctmap/mapper.hpp"

namespace ctmap::io {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string &source, size_t line, const std::string &what);
};

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

// --- graph: nodes `id,lat,lon,layer`, edges `src,dst,class,length_km`
// (empty length_km = geodesic distance between the endpoints)

graph::MultilayerGraph load_graph(std::istream &nodes, std::istream &edges,
                                  const std::string &nodes_name = "nodes",
                                  const std::string &edges_name = "edges");
graph::MultilayerGraph load_graph_files(const std::filesystem::path &nodes,
                                        const std::filesystem::path &edges);
void save_graph(const graph::MultilayerGraph &g, std::ostream &nodes,
                std::ostream &edges);
void save_graph_files(const graph::MultilayerGraph &g,
                      const std::filesystem::path &nodes,
                      const std::filesystem::path &edges);

// --- towers: `id,lat,lon`

std::vector<cell_net::TowerSite> load_towers(
    std::istream &in, const std::string &name = "towers");
std::vector<cell_net::TowerSite> load_towers_file(
    const std::filesystem::path &path);
void save_towers(const std::vector<cell_net::TowerSite> &sites,
                 std::ostream &out);
void save_towers_file(const std::vector<cell_net::TowerSite> &sites,
                      const std::filesystem::path &path);

/// Voronoi export: `id,r_max,vertex_list` with vertices as `lon lat`
/// joined by `; `.
void save_voronoi(const cell_net::CellularNetwork &net, std::ostream &out);

// --- trajectories: `trajectory_id,timestamp,tower_id`, rows grouped by
// trajectory and time-sorted

std::vector<mapper::CellularTrajectory> load_trajectories(
    std::istream &in, const std::string &name = "trajectories");
std::vector<mapper::CellularTrajectory> load_trajectories_file(
    const std::filesystem::path &path);
void save_trajectories(const std::vector<mapper::CellularTrajectory> &trajs,
                       std::ostream &out);
void save_trajectories_file(
    const std::vector<mapper::CellularTrajectory> &trajs,
    const std::filesystem::path &path);

// --- ground truth: `trajectory_id,seq_index,node_id` for node truths or
// `trajectory_id,seq_index,lat,lon` for GPS truths (header selects)

std::vector<eval::GroundTruth> load_truths(
    std::istream &in, const graph::MultilayerGraph &g,
    const std::string &name = "truth");
std::vector<eval::GroundTruth> load_truths_file(
    const std::filesystem::path &path, const graph::MultilayerGraph &g);
void save_truths(const std::vector<eval::GroundTruth> &truths,
                 const graph::MultilayerGraph &g, std::ostream &out);
void save_truths_file(const std::vector<eval::GroundTruth> &truths,
                      const graph::MultilayerGraph &g,
                      const std::filesystem::path &path);

// --- mapped paths: `trajectory_id,seq_index,node_id,is_skeleton`

std::vector<mapper::CompletePath> load_paths(std::istream &in,
                                             const graph::MultilayerGraph &g,
                                             const std::string &name = "paths");
std::vector<mapper::CompletePath> load_paths_file(
    const std::filesystem::path &path, const graph::MultilayerGraph &g);
void save_paths(const std::vector<mapper::CompletePath> &paths,
                const graph::MultilayerGraph &g, std::ostream &out);
void save_paths_file(const std::vector<mapper::CompletePath> &paths,
                     const graph::MultilayerGraph &g,
                     const std::filesystem::path &path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string file_digest(const std::filesystem::path &path);

}  // namespace ctmap::io

#endif  // CTMAP_IO_HPP
