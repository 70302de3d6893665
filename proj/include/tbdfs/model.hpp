#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tbdfs/graph.hpp"
#include "tbdfs/sampler.hpp"
#include "tbdfs/tape.hpp"
#include "tbdfs/time_encoder.hpp"

namespace tbdfs {

// Eq. 6 aggregation over path nodes: learned attention or the path-avg
// ablation (uniform weights).
enum class PathAggMode { kAttention, kUniform };
// Eq. 7 aggregation over paths: learned attention or the paths-avg ablation
// (plain mean of path representations).
enum class PathsAggMode { kAttention, kMean };

enum class BranchMode { kFull, kBfsOnly, kDfsOnly };

struct ModelConfig {
  int d = 8;
  int layers = 2;
  int heads = 1;
  int fanout = 20;
  double alpha = 0.5;
  double dropout = 0.1;
  bool use_time_encoding = true;  // -time turns this off...
  bool mask_future = true;        // ...and this
  PathAggMode path_agg = PathAggMode::kAttention;
  PathsAggMode paths_agg = PathsAggMode::kAttention;
  FanoutPolicy fanout_policy = FanoutPolicy::kMostRecent;
  std::size_t max_paths = 0;  // 0 = keep all
};

void validate_config(const ModelConfig& cfg);

struct HeadParams {
  Tensor wq, wk, wv;
};

struct FfnParams {
  Tensor w1, b1, w2, b2;
};

struct AttnLayerParams {
  std::vector<HeadParams> heads;  // each wq/wk/wv is 3d x 3d
  FfnParams ffn;                  // (d + 3dM) -> d -> d
};

struct AggParams {
  std::vector<HeadParams> heads;  // each d x d
  Tensor w_out, b_out;            // dM -> d
};

struct ModelParams {
  Tensor time_freqs;                 // {1, d/2}
  std::vector<AttnLayerParams> bfs;  // one per layer, layer l at index l-1
  AttnLayerParams dfs_path;
  AggParams dfs_agg;
  FfnParams scorer;                  // 2d -> d -> 1

  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);

  // Canonical enumeration; binding, optimizer state, gradients and
  // checkpoints all follow this order.
  template <class F>
  void visit(F&& f) {
    f("time_encoder.freqs", time_freqs);
    for (std::size_t l = 0; l < bfs.size(); ++l) {
      std::string p = "bfs." + std::to_string(l) + ".";
      for (std::size_t h = 0; h < bfs[l].heads.size(); ++h) {
        std::string hp = p + "head." + std::to_string(h) + ".";
        f(hp + "wq", bfs[l].heads[h].wq);
        f(hp + "wk", bfs[l].heads[h].wk);
        f(hp + "wv", bfs[l].heads[h].wv);
      }
      f(p + "ffn.w1", bfs[l].ffn.w1);
      f(p + "ffn.b1", bfs[l].ffn.b1);
      f(p + "ffn.w2", bfs[l].ffn.w2);
      f(p + "ffn.b2", bfs[l].ffn.b2);
    }
    for (std::size_t h = 0; h < dfs_path.heads.size(); ++h) {
      std::string hp = "dfs_path.head." + std::to_string(h) + ".";
      f(hp + "wq", dfs_path.heads[h].wq);
      f(hp + "wk", dfs_path.heads[h].wk);
      f(hp + "wv", dfs_path.heads[h].wv);
    }
    f("dfs_path.ffn.w1", dfs_path.ffn.w1);
    f("dfs_path.ffn.b1", dfs_path.ffn.b1);
    f("dfs_path.ffn.w2", dfs_path.ffn.w2);
    f("dfs_path.ffn.b2", dfs_path.ffn.b2);
    for (std::size_t h = 0; h < dfs_agg.heads.size(); ++h) {
      std::string hp = "dfs_agg.head." + std::to_string(h) + ".";
      f(hp + "wq", dfs_agg.heads[h].wq);
      f(hp + "wk", dfs_agg.heads[h].wk);
      f(hp + "wv", dfs_agg.heads[h].wv);
    }
    f("dfs_agg.w_out", dfs_agg.w_out);
    f("dfs_agg.b_out", dfs_agg.b_out);
    f("scorer.w1", scorer.w1);
    f("scorer.b1", scorer.b1);
    f("scorer.w2", scorer.w2);
    f("scorer.b2", scorer.b2);
  }

  template <class F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit(
        [&](const std::string& name, Tensor& t) {
          f(name, static_cast<const Tensor&>(t));
        });
  }
};

// Tape handles mirroring ModelParams; one binding per forward tape.
struct BoundHead {
  Var wq, wk, wv;
};
struct BoundFfn {
  Var w1, b1, w2, b2;
};
struct BoundAttnLayer {
  std::vector<BoundHead> heads;
  BoundFfn ffn;
};
struct BoundAgg {
  std::vector<BoundHead> heads;
  Var w_out, b_out;
};
struct BoundParams {
  Var time_freqs;
  std::vector<BoundAttnLayer> bfs;
  BoundAttnLayer dfs_path;
  BoundAgg dfs_agg;
  BoundFfn scorer;
  // (name, var) pairs in visit order
  std::vector<std::pair<std::string, Var>> flat;
};

BoundParams bind_params(Tape& tape, const ModelParams& params);

// ---- layer building blocks ----

// h_j || x_ij || phi  (all {1,d}) -> {1,3d}
Var neighbor_feature(Tape& tape, Var h_j, Var x_ij, Var phi);
// h_i || 0_d || phi0 -> {1,3d}
Var self_feature(Tape& tape, Var h_i, Var phi0, std::size_t d);

// Multihead cross-attention over neighbor features followed by the combine
// FFN. `query_feat` and `key_feats` are {1,3d}; `ffn_carry` is the {1,d}
// vector concatenated in front of the head outputs. Empty key list yields
// zero head outputs.
Var bfs_attend(Tape& tape, const BoundAttnLayer& layer, Var query_feat,
               const std::vector<Var>& key_feats, Var ffn_carry,
               PathAggMode agg, double dropout_p, Mode mode, Rng& rng);

// Multihead attention with query h_bfs over the path representations,
// projected back to d (Eq. 7); kMean averages the representations instead;
// empty path set yields a zero vector.
Var dfs_aggregate(Tape& tape, const BoundAgg& agg, Var h_bfs,
                  const std::vector<Var>& path_reprs, PathsAggMode mode,
                  double dropout_p, Mode run_mode, Rng& rng);

// alpha * h_bfs + (1 - alpha) * h_dfs
Var balance(Tape& tape, Var h_bfs, Var h_dfs, double alpha);

// Sigmoid link scorer FFN on h_i || h_j; returns the pre-sigmoid logit {1,1}.
Var link_logit(Tape& tape, const BoundFfn& scorer, Var h_i, Var h_j);

// Full model: sampling, both attention branches, balance.
class Model {
 public:
  Model(const TemporalGraph& g, const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  const TemporalGraph& graph() const { return *g_; }

  // h'_i(t) per the requested branch; rng drives dropout (train mode) and
  // uniform fan-out sampling when configured.
  Var represent(Tape& tape, const BoundParams& bp, NodeId i, double t,
                BranchMode branch, Mode mode, Rng& rng) const;

  // h^BFS over an already-expanded tree (exposed for tests).
  Var bfs_representation(Tape& tape, const BoundParams& bp, const BfsTree& tree,
                         Mode mode, Rng& rng) const;
  // Eq. 6 encoding of one path.
  Var path_encoding(Tape& tape, const BoundParams& bp, const TemporalPath& path,
                    Mode mode, Rng& rng) const;

 private:
  Var node_feat_const(Tape& tape, NodeId i) const;
  Var edge_feat_const(Tape& tape, EventId e) const;
  Var phi(Tape& tape, const BoundParams& bp, double dt) const;

  const TemporalGraph* g_;
  ModelConfig cfg_;
};

}  // namespace tbdfs
