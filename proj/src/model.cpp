#include "tbdfs/model.hpp"

#include <cmath>
#include <functional>
#include <unordered_map>

#include "tbdfs/errors.hpp"

namespace tbdfs {

void validate_config(const ModelConfig& cfg) {
  if (cfg.d <= 0 || cfg.d % 2 != 0) {
    throw ConfigError("model dimension must be positive and even, got " +
                      std::to_string(cfg.d));
  }
  if (cfg.layers < 1) throw ConfigError("layers must be >= 1");
  if (cfg.heads < 1) throw ConfigError("heads must be >= 1");
  if (cfg.fanout < 1) throw ConfigError("fanout must be >= 1");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) {
    throw ConfigError("alpha must lie in [0, 1], got " +
                      std::to_string(cfg.alpha));
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw ConfigError("dropout must lie in [0, 1), got " +
                      std::to_string(cfg.dropout));
  }
}

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return Tensor::uniform({fan_in, fan_out}, a, rng);
}

AttnLayerParams init_attn_layer(std::size_t d, int heads, Rng& rng) {
  AttnLayerParams p;
  const std::size_t f = 3 * d;
  for (int h = 0; h < heads; ++h) {
    p.heads.push_back(HeadParams{glorot(f, f, rng), glorot(f, f, rng),
                                 glorot(f, f, rng)});
  }
  const std::size_t ffn_in = d + f * static_cast<std::size_t>(heads);
  p.ffn.w1 = glorot(ffn_in, d, rng);
  p.ffn.b1 = Tensor::zeros({1, d});
  p.ffn.w2 = glorot(d, d, rng);
  p.ffn.b2 = Tensor::zeros({1, d});
  return p;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  Rng rng(derive_seed(seed, 0x1717));
  const std::size_t d = static_cast<std::size_t>(cfg.d);
  ModelParams p;
  p.time_freqs = init_time_frequencies(cfg.d);
  for (int l = 0; l < cfg.layers; ++l) {
    p.bfs.push_back(init_attn_layer(d, cfg.heads, rng));
  }
  p.dfs_path = init_attn_layer(d, cfg.heads, rng);
  for (int h = 0; h < cfg.heads; ++h) {
    p.dfs_agg.heads.push_back(
        HeadParams{glorot(d, d, rng), glorot(d, d, rng), glorot(d, d, rng)});
  }
  p.dfs_agg.w_out = glorot(d * static_cast<std::size_t>(cfg.heads), d, rng);
  p.dfs_agg.b_out = Tensor::zeros({1, d});
  p.scorer.w1 = glorot(2 * d, d, rng);
  p.scorer.b1 = Tensor::zeros({1, d});
  p.scorer.w2 = glorot(d, 1, rng);
  p.scorer.b2 = Tensor::zeros({1, 1});
  return p;
}

BoundParams bind_params(Tape& tape, const ModelParams& params) {
  std::unordered_map<std::string, Var> by_name;
  BoundParams bp;
  params.visit([&](const std::string& name, const Tensor& t) {
    Var v = tape.param(t);
    by_name.emplace(name, v);
    bp.flat.emplace_back(name, v);
  });
  auto at = [&](const std::string& name) { return by_name.at(name); };

  bp.time_freqs = at("time_encoder.freqs");
  bp.bfs.resize(params.bfs.size());
  for (std::size_t l = 0; l < params.bfs.size(); ++l) {
    std::string p = "bfs." + std::to_string(l) + ".";
    bp.bfs[l].heads.resize(params.bfs[l].heads.size());
    for (std::size_t h = 0; h < params.bfs[l].heads.size(); ++h) {
      std::string hp = p + "head." + std::to_string(h) + ".";
      bp.bfs[l].heads[h] = BoundHead{at(hp + "wq"), at(hp + "wk"),
                                     at(hp + "wv")};
    }
    bp.bfs[l].ffn = BoundFfn{at(p + "ffn.w1"), at(p + "ffn.b1"),
                             at(p + "ffn.w2"), at(p + "ffn.b2")};
  }
  bp.dfs_path.heads.resize(params.dfs_path.heads.size());
  for (std::size_t h = 0; h < params.dfs_path.heads.size(); ++h) {
    std::string hp = "dfs_path.head." + std::to_string(h) + ".";
    bp.dfs_path.heads[h] = BoundHead{at(hp + "wq"), at(hp + "wk"),
                                     at(hp + "wv")};
  }
  bp.dfs_path.ffn = BoundFfn{at("dfs_path.ffn.w1"), at("dfs_path.ffn.b1"),
                             at("dfs_path.ffn.w2"), at("dfs_path.ffn.b2")};
  bp.dfs_agg.heads.resize(params.dfs_agg.heads.size());
  for (std::size_t h = 0; h < params.dfs_agg.heads.size(); ++h) {
    std::string hp = "dfs_agg.head." + std::to_string(h) + ".";
    bp.dfs_agg.heads[h] = BoundHead{at(hp + "wq"), at(hp + "wk"),
                                    at(hp + "wv")};
  }
  bp.dfs_agg.w_out = at("dfs_agg.w_out");
  bp.dfs_agg.b_out = at("dfs_agg.b_out");
  bp.scorer = BoundFfn{at("scorer.w1"), at("scorer.b1"), at("scorer.w2"),
                       at("scorer.b2")};
  return bp;
}

Var neighbor_feature(Tape& tape, Var h_j, Var x_ij, Var phi) {
  return tape.concat({h_j, x_ij, phi}, 1);
}

Var self_feature(Tape& tape, Var h_i, Var phi0, std::size_t d) {
  Var zeros = tape.constant(Tensor::zeros({1, d}));
  return tape.concat({h_i, zeros, phi0}, 1);
}

namespace {

Var ffn_forward(Tape& tape, const BoundFfn& ffn, Var input, double dropout_p,
                Mode mode, Rng& rng) {
  Var hidden = tape.add(tape.matmul(input, ffn.w1), ffn.b1);
  hidden = tape.relu(hidden);
  if (dropout_p > 0.0) hidden = tape.dropout(hidden, dropout_p, mode, rng);
  return tape.add(tape.matmul(hidden, ffn.w2), ffn.b2);
}

}  // namespace

Var bfs_attend(Tape& tape, const BoundAttnLayer& layer, Var query_feat,
               const std::vector<Var>& key_feats, Var ffn_carry,
               PathAggMode agg, double dropout_p, Mode mode, Rng& rng) {
  const std::size_t feat_dim = tape.value(query_feat).cols();
  std::vector<Var> heads;
  heads.reserve(layer.heads.size());
  if (key_feats.empty()) {
    Var zero_heads = tape.constant(
        Tensor::zeros({1, feat_dim * layer.heads.size()}));
    Var combined = tape.concat({ffn_carry, zero_heads}, 1);
    return ffn_forward(tape, layer.ffn, combined, dropout_p, mode, rng);
  }
  Var feats = key_feats.size() == 1 ? key_feats[0]
                                    : tape.concat(key_feats, 0);  // {N,3d}
  const std::size_t n = tape.value(feats).rows();
  for (const BoundHead& head : layer.heads) {
    Var q = tape.matmul(query_feat, head.wq);            // {1,3d}
    Var keys = tape.matmul(feats, head.wk);              // {N,3d}
    Var scores = tape.matmul(keys, tape.transpose(q));   // {N,1}
    Var weights;
    if (agg == PathAggMode::kAttention) {
      weights = tape.softmax(scores, 0);
      if (dropout_p > 0.0) {
        weights = tape.dropout(weights, dropout_p, mode, rng);
      }
    } else {
      weights = tape.constant(
          Tensor::full({n, 1}, 1.0 / static_cast<double>(n)));
    }
    Var values = tape.matmul(feats, head.wv);            // {N,3d}
    heads.push_back(tape.matmul(tape.transpose(weights), values));
  }
  Var head_concat = heads.size() == 1 ? heads[0] : tape.concat(heads, 1);
  Var combined = tape.concat({ffn_carry, head_concat}, 1);
  return ffn_forward(tape, layer.ffn, combined, dropout_p, mode, rng);
}

Var dfs_aggregate(Tape& tape, const BoundAgg& agg, Var h_bfs,
                  const std::vector<Var>& path_reprs, PathsAggMode mode,
                  double dropout_p, Mode run_mode, Rng& rng) {
  const std::size_t d = tape.value(h_bfs).cols();
  if (path_reprs.empty()) {
    return tape.constant(Tensor::zeros({1, d}));
  }
  Var stack = path_reprs.size() == 1 ? path_reprs[0]
                                     : tape.concat(path_reprs, 0);  // {R,d}
  const std::size_t r = tape.value(stack).rows();
  if (mode == PathsAggMode::kMean) {
    Var mean_row = tape.constant(
        Tensor::full({1, r}, 1.0 / static_cast<double>(r)));
    return tape.matmul(mean_row, stack);
  }
  std::vector<Var> heads;
  heads.reserve(agg.heads.size());
  for (const BoundHead& head : agg.heads) {
    Var q = tape.matmul(h_bfs, head.wq);                 // {1,d}
    Var keys = tape.matmul(stack, head.wk);              // {R,d}
    Var scores = tape.matmul(keys, tape.transpose(q));   // {R,1}
    Var weights = tape.softmax(scores, 0);
    if (dropout_p > 0.0) {
      weights = tape.dropout(weights, dropout_p, run_mode, rng);
    }
    Var values = tape.matmul(stack, head.wv);            // {R,d}
    heads.push_back(tape.matmul(tape.transpose(weights), values));
  }
  Var head_concat = heads.size() == 1 ? heads[0] : tape.concat(heads, 1);
  return tape.add(tape.matmul(head_concat, agg.w_out), agg.b_out);
}

Var balance(Tape& tape, Var h_bfs, Var h_dfs, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw ConfigError("balance: alpha must lie in [0, 1], got " +
                      std::to_string(alpha));
  }
  return tape.add(tape.scale(h_bfs, alpha), tape.scale(h_dfs, 1.0 - alpha));
}

Var link_logit(Tape& tape, const BoundFfn& scorer, Var h_i, Var h_j) {
  Var input = tape.concat({h_i, h_j}, 1);
  Var hidden = tape.relu(tape.add(tape.matmul(input, scorer.w1), scorer.b1));
  return tape.add(tape.matmul(hidden, scorer.w2), scorer.b2);
}

Model::Model(const TemporalGraph& g, const ModelConfig& cfg)
    : g_(&g), cfg_(cfg) {
  validate_config(cfg);
  if (g.feat_dim() != static_cast<std::size_t>(cfg.d)) {
    throw ConfigError("graph feature dimension " +
                      std::to_string(g.feat_dim()) +
                      " does not match model dimension " +
                      std::to_string(cfg.d));
  }
}

Var Model::node_feat_const(Tape& tape, NodeId i) const {
  return tape.constant(Tensor::row(g_->node_feature(i)));
}

Var Model::edge_feat_const(Tape& tape, EventId e) const {
  return tape.constant(Tensor::row(g_->edge_feature(e)));
}

Var Model::phi(Tape& tape, const BoundParams& bp, double dt) const {
  return encode_time(tape, bp.time_freqs, dt, cfg_.d, cfg_.use_time_encoding);
}

Var Model::bfs_representation(Tape& tape, const BoundParams& bp,
                              const BfsTree& tree, Mode mode, Rng& rng) const {
  const int depth = static_cast<int>(tree.layers.size());
  // children[l][idx]: indices into layer l of entries whose parent is entry
  // idx of layer l-1 (l == 0 lists the root's children).
  std::vector<std::vector<std::vector<int>>> children(depth);
  children[0].resize(1);
  for (int c = 0; c < static_cast<int>(tree.layers[0].size()); ++c) {
    children[0][0].push_back(c);
  }
  for (int l = 1; l < depth; ++l) {
    children[l].resize(tree.layers[l - 1].size());
    for (int c = 0; c < static_cast<int>(tree.layers[l].size()); ++c) {
      children[l][tree.layers[l][c].parent].push_back(c);
    }
  }

  // memo[(depth_pos, idx)][m] = representation at model layer m
  auto key = [](int dpos, int idx) {
    return (static_cast<std::int64_t>(dpos) << 32) | static_cast<std::uint32_t>(idx);
  };
  std::unordered_map<std::int64_t, std::vector<Var>> memo;

  auto node_of = [&](int dpos, int idx) {
    return dpos == 0 ? tree.root : tree.layers[dpos - 1][idx].node;
  };
  auto time_of = [&](int dpos, int idx) {
    return dpos == 0 ? tree.root_time : tree.layers[dpos - 1][idx].ts;
  };

  std::function<Var(int, int, int)> rep = [&](int dpos, int idx,
                                              int m) -> Var {
    auto& slot = memo[key(dpos, idx)];
    if (slot.empty()) slot.assign(depth + 1, Var{});
    if (slot[m].valid()) return slot[m];
    Var out;
    if (m == 0) {
      out = node_feat_const(tape, node_of(dpos, idx));
    } else {
      Var h_prev = rep(dpos, idx, m - 1);
      Var q = self_feature(tape, h_prev, phi(tape, bp, 0.0),
                           static_cast<std::size_t>(cfg_.d));
      std::vector<Var> neigh;
      const double t_here = time_of(dpos, idx);
      if (dpos < depth) {
        for (int c : children[dpos][dpos == 0 ? 0 : idx]) {
          const BfsEntry& e = tree.layers[dpos][c];
          Var h_c = rep(dpos + 1, c, m - 1);
          Var feat = neighbor_feature(tape, h_c, edge_feat_const(tape, e.event),
                                      phi(tape, bp, t_here - e.ts));
          neigh.push_back(feat);
        }
      }
      out = bfs_attend(tape, bp.bfs[m - 1], q, neigh, h_prev,
                       PathAggMode::kAttention, cfg_.dropout, mode, rng);
    }
    slot[m] = out;
    return out;
  };

  return rep(0, 0, depth);
}

Var Model::path_encoding(Tape& tape, const BoundParams& bp,
                         const TemporalPath& path, Mode mode, Rng& rng) const {
  if (path.hops.empty()) {
    throw ConfigError("path_encoding: empty path");
  }
  Var x_root = node_feat_const(tape, path.target);
  Var q = self_feature(tape, x_root, phi(tape, bp, 0.0),
                       static_cast<std::size_t>(cfg_.d));
  std::vector<Var> feats;
  feats.reserve(path.hops.size());
  for (const PathHop& hop : path.hops) {
    // time difference always measured from the target time
    feats.push_back(neighbor_feature(
        tape, node_feat_const(tape, hop.node), edge_feat_const(tape, hop.event),
        phi(tape, bp, path.target_time - hop.ts)));
  }
  return bfs_attend(tape, bp.dfs_path, q, feats, x_root, cfg_.path_agg,
                    cfg_.dropout, mode, rng);
}

Var Model::represent(Tape& tape, const BoundParams& bp, NodeId i, double t,
                     BranchMode branch, Mode mode, Rng& rng) const {
  SamplerOptions opts;
  opts.fanout = static_cast<std::size_t>(cfg_.fanout);
  opts.policy = cfg_.fanout_policy;
  opts.mask_future = cfg_.mask_future;
  BfsTree tree = expand(*g_, i, t, cfg_.layers, opts, &rng);

  Var h_bfs = bfs_representation(tape, bp, tree, mode, rng);
  if (branch == BranchMode::kBfsOnly) return h_bfs;

  std::vector<TemporalPath> paths = collect_paths(tree);
  if (cfg_.max_paths > 0) {
    paths = subsample_paths(std::move(paths), cfg_.max_paths, rng);
  }
  std::vector<Var> reprs;
  reprs.reserve(paths.size());
  for (const TemporalPath& p : paths) {
    reprs.push_back(path_encoding(tape, bp, p, mode, rng));
  }
  Var h_dfs = dfs_aggregate(tape, bp.dfs_agg, h_bfs, reprs, cfg_.paths_agg,
                            cfg_.dropout, mode, rng);
  if (branch == BranchMode::kDfsOnly) return h_dfs;
  return balance(tape, h_bfs, h_dfs, cfg_.alpha);
}

}  // namespace tbdfs
