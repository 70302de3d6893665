#pragma once

#include <cstdint>
#include <vector>

#include "tbdfs/graph.hpp"

namespace tbdfs {

// One hop of a temporal path: the node reached and the edge event used.
struct PathHop {
  NodeId node;
  double ts;
  EventId event;
};

// Path ending at `target` at `target_time`; hops[0] is the most recent hop.
// In masked mode timestamps strictly decrease along hops.
struct TemporalPath {
  NodeId target;
  double target_time;
  std::vector<PathHop> hops;

  std::size_t length() const { return hops.size(); }
};

struct BfsEntry {
  NodeId node;
  double ts;       // event time of the arc from the parent
  EventId event;
  int parent;      // index into the previous layer; -1 for layer 1
};

// Layered expansion rooted at (root, root_time); layers[l] holds depth-(l+1)
// entries drawn from their parent's temporal neighbors at the parent's
// event time.
struct BfsTree {
  NodeId root;
  double root_time;
  std::vector<std::vector<BfsEntry>> layers;

  std::size_t entry_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
  }
};

struct SamplerOptions {
  std::size_t fanout = 20;
  FanoutPolicy policy = FanoutPolicy::kMostRecent;
  bool mask_future = true;  // off only for the -time ablation
};

BfsTree expand(const TemporalGraph& g, NodeId i, double t, int depth,
               const SamplerOptions& opts, Rng* rng = nullptr);

// Every root-to-leaf branch of the tree, including branches that died before
// reaching full depth. No graph queries; linear in tree size.
std::vector<TemporalPath> collect_paths(const BfsTree& tree);

// Exhaustive enumeration over the full adjacency (no fan-out cap) of all
// strictly time-decreasing paths of length <= depth ending at (i, t).
// Refuses once more than `guard` paths have been produced.
std::vector<TemporalPath> brute_force_paths(const TemporalGraph& g, NodeId i,
                                            double t, int depth,
                                            std::size_t guard = 1000000);

// Uniform subsample without replacement, original order kept.
std::vector<TemporalPath> subsample_paths(std::vector<TemporalPath> paths,
                                          std::size_t max_paths, Rng& rng);

}  // namespace tbdfs
