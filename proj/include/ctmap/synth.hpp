/**
 * Synthetic worlds and trips.
 *
 * Deterministic generator for a three-layer toy city: a road lattice,
 * metro and train lines with cross-layer links, and a jittered antenna
 * grid. Trips follow least-cost paths timed by edge speeds and are sampled
 * into sparse cellular observations with optional assignment noise. Also
 * hosts the exhaustive skeleton search used as the decoding oracle.
 */

#ifndef CTMAP_SYNTH_HPP
#define CTMAP_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ctmap/cell_net.hpp"
#include "ctmap/eval.hpp"
#include "ctmap/graph.hpp"
#include "ctmap/mapper.hpp"

namespace ctmap::synth {

struct SynthConfig {
  uint64_t seed = 7;

  int road_rows = 25;
  int road_cols = 25;
  double road_spacing_km = 1.0;

  int metro_lines = 3;
  double metro_station_spacing_km = 0.8;

  int train_lines = 2;
  double train_station_spacing_km = 3.0;

  double antenna_spacing_km = 2.0;
  double antenna_jitter_km = 0.4;

  // Station-to-road link radius. Road spacing 1 km puts every point within
  // ~0.71 km of a lattice node, so 0.75 always connects the layers.
  double crosslayer_radius_km = 0.75;

  double observation_interval_s = 900.0;
  double assignment_noise = 0.0;  // probability of the 2nd-nearest antenna

  geo::LatLon origin = {48.80, 2.20};  // south-west corner of the lattice
  double bbox_margin_km = 2.0;
};

struct World {
  graph::MultilayerGraph graph;
  cell_net::CellularNetwork network;
  geo::BoundingBox bbox;
};

/**
 * Builds the world for a config. Deterministic per seed. Self-checks the
 * per-layer mean degree and edge length against the realism targets
 * (road 3.01/1.34, metro 2.35/0.757, train 2.025/3.07, each within a
 * factor of 1.5) and graph connectivity; a disconnected world retries with
 * a reseeded jitter up to 10 times before throwing.
 */
World generate_world(const SynthConfig &config);

struct Trip {
  eval::GroundTruth truth;  // node-based
  mapper::CellularTrajectory trajectory;
};

/**
 * Simulates one trip: truth is the least-cost path src -> dst, traversed
 * at per-class edge speeds; the position is sampled every
 * observation_interval_s (plus the arrival point) and each sample reports
 * its nearest antenna, flipped to the 2nd nearest with the configured
 * noise probability. Throws when the trip is shorter than one interval.
 */
Trip simulate_trip(const World &world, graph::NodeIndex src,
                   graph::NodeIndex dst, const SynthConfig &config,
                   uint64_t seed, const std::string &trajectory_id = "trip");

/**
 * Random corpus of n trips between road nodes at least min_trip_km apart
 * (by truth length), per-trip seeds derived from the master seed.
 */
std::vector<Trip> generate_corpus(const World &world,
                                  const SynthConfig &config, size_t n_trips,
                                  double min_trip_km = 8.0);

/**
 * Exhaustive skeleton search: enumerates every candidate sequence, scores
 * it through the same TransitionScorer and accumulation order as the
 * Viterbi decoder, and applies the same tie rule (the backtracking
 * decoder's choice is the max-score sequence whose reversed id sequence is
 * lexicographically smallest). Oracle for the decoder; throws when the
 * sequence space exceeds 10^6.
 */
mapper::SkeletonPath brute_force_skeleton(const graph::MultilayerGraph &g,
                                          const cell_net::CellularNetwork &net,
                                          const mapper::CellularTrajectory &traj,
                                          const mapper::MapperParams &params,
                                          mapper::TransitionModel model);

/// The same exhaustive search over explicit candidate sets; counterpart of
/// viterbi_decode.
mapper::DecodedSequence brute_force_decode(
    const graph::MultilayerGraph &g,
    const std::vector<std::vector<mapper::Candidate>> &steps,
    mapper::TransitionScorer &scorer);

}  // namespace ctmap::synth

#endif  // CTMAP_SYNTH_HPP
