#pragma once

#include <cstdint>
#include <string>

#include "tbdfs/graph.hpp"

namespace tbdfs {

// Bipartite user/item event stream where, with probability revisit_prob, a
// user's next destination repeats one of its recent destinations. The
// two-hop user-item-user revisit path is the planted signal; everything else
// is uniform noise.
struct PlantedParams {
  int n_users = 200;
  int n_items = 150;
  double revisit_prob = 0.8;
  int noise_edges = 500;   // extra uniform events on top of the main stream
  int horizon = 4500;      // main-stream events, one per time step
  int feat_dim = 8;
  int recent_window = 3;   // revisits pick among this many recent distinct items
};

TemporalGraph gen_planted(const PlantedParams& params, std::uint64_t seed);

// Dataset CSV (src,dst,ts) plus node-feature sidecar (node_id,f1..fd),
// loadable through TemporalGraph::load_csv.
void write_graph_csv(const TemporalGraph& g, const std::string& events_path,
                     const std::string& nodes_path);

}  // namespace tbdfs
