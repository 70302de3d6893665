#include "tbdfs/sampler.hpp"

#include <algorithm>

#include "tbdfs/errors.hpp"

namespace tbdfs {

BfsTree expand(const TemporalGraph& g, NodeId i, double t, int depth,
               const SamplerOptions& opts, Rng* rng) {
  if (depth < 1) throw ConfigError("expand: depth must be >= 1");
  if (opts.fanout < 1) throw ConfigError("expand: fanout must be >= 1");
  BfsTree tree;
  tree.root = i;
  tree.root_time = t;
  tree.layers.resize(depth);

  auto neighbors = [&](NodeId node, double at) {
    return opts.mask_future
               ? g.temporal_neighbors(node, at, opts.fanout, opts.policy, rng)
               : g.neighbors_unmasked(node, opts.fanout, opts.policy, rng);
  };

  for (const TemporalNeighbor& nb : neighbors(i, t)) {
    tree.layers[0].push_back(BfsEntry{nb.node, nb.ts, nb.event, -1});
  }
  for (int l = 1; l < depth; ++l) {
    const auto& prev = tree.layers[l - 1];
    for (int p = 0; p < static_cast<int>(prev.size()); ++p) {
      for (const TemporalNeighbor& nb : neighbors(prev[p].node, prev[p].ts)) {
        tree.layers[l].push_back(BfsEntry{nb.node, nb.ts, nb.event, p});
      }
    }
  }
  return tree;
}

std::vector<TemporalPath> collect_paths(const BfsTree& tree) {
  std::vector<TemporalPath> paths;
  const int depth = static_cast<int>(tree.layers.size());
  // mark entries with at least one child; the rest are branch ends
  std::vector<std::vector<bool>> has_child(depth);
  for (int l = 0; l < depth; ++l) {
    has_child[l].assign(tree.layers[l].size(), false);
  }
  for (int l = 1; l < depth; ++l) {
    for (const BfsEntry& e : tree.layers[l]) {
      has_child[l - 1][e.parent] = true;
    }
  }
  for (int l = 0; l < depth; ++l) {
    for (std::size_t idx = 0; idx < tree.layers[l].size(); ++idx) {
      if (has_child[l][idx]) continue;
      TemporalPath p;
      p.target = tree.root;
      p.target_time = tree.root_time;
      int layer = l;
      int at = static_cast<int>(idx);
      while (layer >= 0) {
        const BfsEntry& e = tree.layers[layer][at];
        p.hops.push_back(PathHop{e.node, e.ts, e.event});
        at = e.parent;
        --layer;
      }
      std::reverse(p.hops.begin(), p.hops.end());
      paths.push_back(std::move(p));
    }
  }
  return paths;
}

namespace {

void brute_force_rec(const TemporalGraph& g, NodeId node, double at, int left,
                     std::size_t guard, TemporalPath& cur,
                     std::vector<TemporalPath>& out) {
  const std::size_t all = g.degree(node);
  std::vector<TemporalNeighbor> nbs =
      g.temporal_neighbors(node, at, all == 0 ? 1 : all);
  if (left == 0 || nbs.empty()) {
    if (!cur.hops.empty()) {
      if (out.size() >= guard) {
        throw SamplingError(
            "brute_force_paths: path count exceeds guard of " +
            std::to_string(guard));
      }
      out.push_back(cur);
    }
    return;
  }
  for (const TemporalNeighbor& nb : nbs) {
    cur.hops.push_back(PathHop{nb.node, nb.ts, nb.event});
    brute_force_rec(g, nb.node, nb.ts, left - 1, guard, cur, out);
    cur.hops.pop_back();
  }
}

}  // namespace

std::vector<TemporalPath> brute_force_paths(const TemporalGraph& g, NodeId i,
                                            double t, int depth,
                                            std::size_t guard) {
  if (depth < 1) throw ConfigError("brute_force_paths: depth must be >= 1");
  std::vector<TemporalPath> out;
  TemporalPath cur;
  cur.target = i;
  cur.target_time = t;
  brute_force_rec(g, i, t, depth, guard, cur, out);
  return out;
}

std::vector<TemporalPath> subsample_paths(std::vector<TemporalPath> paths,
                                          std::size_t max_paths, Rng& rng) {
  if (max_paths == 0 || paths.size() <= max_paths) return paths;
  // reservoir over indices, then original order
  std::vector<std::size_t> keep(max_paths);
  for (std::size_t i = 0; i < max_paths; ++i) keep[i] = i;
  for (std::size_t i = max_paths; i < paths.size(); ++i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    if (j < max_paths) keep[j] = i;
  }
  std::sort(keep.begin(), keep.end());
  std::vector<TemporalPath> out;
  out.reserve(max_paths);
  for (std::size_t idx : keep) out.push_back(std::move(paths[idx]));
  return out;
}

}  // namespace tbdfs
