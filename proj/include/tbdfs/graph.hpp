#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbdfs/rng.hpp"

namespace tbdfs {

using NodeId = std::int32_t;
using EventId = std::int64_t;

// One undirected edge event, stored as two mirrored arcs.
struct EdgeEvent {
  NodeId src;
  NodeId dst;
  double ts;
};

// A (neighbor, time) occurrence: the same partner at different times shows
// up as distinct entries.
struct TemporalNeighbor {
  NodeId node;
  double ts;
  EventId event;
};

enum class FanoutPolicy { kMostRecent, kUniform };

// Whether src/dst node sets are disjoint; drives negative sampling.
struct PartitionInfo {
  bool bipartite = false;
  std::vector<NodeId> dst_nodes;  // distinct destinations, ascending
};

// Immutable after construction; adjacency per node sorted ascending by
// (ts, event id). Safe to share across threads.
class TemporalGraph {
 public:
  TemporalGraph(std::vector<EdgeEvent> events,
                std::vector<std::vector<double>> node_features,
                std::vector<std::vector<double>> edge_features,
                std::size_t feat_dim, std::vector<std::string> node_names);

  // Headered CSV `src,dst,ts[,f1..fn]`, optional sidecar `node_id,f1..fn`.
  // Extra feature columns beyond d are dropped, missing ones zero-padded.
  static TemporalGraph load_csv(const std::string& path, std::size_t d,
                                const std::string& node_feature_path = "");

  std::size_t node_count() const { return node_feat_.size(); }
  std::size_t event_count() const { return events_.size(); }
  std::size_t feat_dim() const { return feat_dim_; }
  const EdgeEvent& event(EventId e) const { return events_[e]; }
  const std::vector<double>& node_feature(NodeId i) const;
  const std::vector<double>& edge_feature(EventId e) const {
    return edge_feat_[e];
  }
  const std::string& node_name(NodeId i) const { return node_names_[i]; }
  // id for a CSV node name; LookupError if absent
  NodeId find_node(const std::string& name) const;
  const PartitionInfo& partition() const { return partition_; }
  double min_ts() const;
  double max_ts() const;

  // The k most recent events of node i strictly before t, ascending by
  // (ts, event id). kUniform draws k of the eligible events instead.
  std::vector<TemporalNeighbor> temporal_neighbors(
      NodeId i, double t, std::size_t k,
      FanoutPolicy policy = FanoutPolicy::kMostRecent,
      Rng* rng = nullptr) const;

  // Same, but ignoring time entirely (the -time ablation disables masking).
  std::vector<TemporalNeighbor> neighbors_unmasked(
      NodeId i, std::size_t k, FanoutPolicy policy = FanoutPolicy::kMostRecent,
      Rng* rng = nullptr) const;

  std::size_t degree(NodeId i) const;

 private:
  struct Arc {
    NodeId dst;
    double ts;
    EventId event;
  };

  void check_node(NodeId i) const;
  std::vector<TemporalNeighbor> pick(const std::vector<Arc>& arcs,
                                     std::size_t prefix, std::size_t k,
                                     FanoutPolicy policy, Rng* rng) const;

  std::vector<EdgeEvent> events_;
  std::vector<std::vector<double>> node_feat_;
  std::vector<std::vector<double>> edge_feat_;
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::string> node_names_;
  std::size_t feat_dim_;
  PartitionInfo partition_;
};

// Chronological split by event count; boundaries resolved by (ts, event id)
// so the three ranges are contiguous in time.
struct SplitBundle {
  std::vector<EventId> train;
  std::vector<EventId> val;
  std::vector<EventId> test;
  double t_train_end = 0.0;
  double t_val_end = 0.0;
};

SplitBundle chronological_split(const TemporalGraph& g,
                                double train_frac = 0.70,
                                double val_frac = 0.15);

}  // namespace tbdfs
