#include "tbdfs/config.hpp"

#include "tbdfs/errors.hpp"

namespace tbdfs {

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.d = d;
  m.layers = layers;
  m.heads = heads;
  m.fanout = fanout;
  m.alpha = alpha;
  m.dropout = dropout;
  m.use_time_encoding = use_time_encoding;
  m.mask_future = mask_future;
  if (path_agg == "attention") {
    m.path_agg = PathAggMode::kAttention;
  } else if (path_agg == "uniform") {
    m.path_agg = PathAggMode::kUniform;
  } else {
    throw ConfigError("unknown path_agg '" + path_agg + "'");
  }
  if (paths_agg == "attention") {
    m.paths_agg = PathsAggMode::kAttention;
  } else if (paths_agg == "mean") {
    m.paths_agg = PathsAggMode::kMean;
  } else {
    throw ConfigError("unknown paths_agg '" + paths_agg + "'");
  }
  if (fanout_policy == "recent") {
    m.fanout_policy = FanoutPolicy::kMostRecent;
  } else if (fanout_policy == "uniform") {
    m.fanout_policy = FanoutPolicy::kUniform;
  } else {
    throw ConfigError("unknown fanout_policy '" + fanout_policy + "'");
  }
  m.max_paths = max_paths;
  return m;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["d"] = d;
  j["layers"] = layers;
  j["heads"] = heads;
  j["fanout"] = fanout;
  j["alpha"] = alpha;
  j["dropout"] = dropout;
  j["use_time_encoding"] = use_time_encoding;
  j["mask_future"] = mask_future;
  j["path_agg"] = path_agg;
  j["paths_agg"] = paths_agg;
  j["fanout_policy"] = fanout_policy;
  j["max_paths"] = max_paths;
  j["lr"] = lr;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["weight_decay"] = weight_decay;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  j["train_frac"] = train_frac;
  j["val_frac"] = val_frac;
  j["threads"] = threads;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("d", c.d);
  take("layers", c.layers);
  take("heads", c.heads);
  take("fanout", c.fanout);
  take("alpha", c.alpha);
  take("dropout", c.dropout);
  take("use_time_encoding", c.use_time_encoding);
  take("mask_future", c.mask_future);
  take("path_agg", c.path_agg);
  take("paths_agg", c.paths_agg);
  take("fanout_policy", c.fanout_policy);
  take("max_paths", c.max_paths);
  take("lr", c.lr);
  take("beta1", c.beta1);
  take("beta2", c.beta2);
  take("weight_decay", c.weight_decay);
  take("batch_size", c.batch_size);
  take("epochs", c.epochs);
  take("patience", c.patience);
  take("seed", c.seed);
  take("train_frac", c.train_frac);
  take("val_frac", c.val_frac);
  take("threads", c.threads);
  return c;
}

RunConfig apply_variant(const RunConfig& base, const std::string& variant) {
  RunConfig c = base;
  if (variant == "full") {
    return c;
  }
  if (variant == "-BFS") {
    c.alpha = 0.0;
    return c;
  }
  if (variant == "-DFS") {
    c.alpha = 1.0;
    return c;
  }
  if (variant == "path-avg") {
    c.path_agg = "uniform";
    return c;
  }
  if (variant == "paths-avg") {
    c.paths_agg = "mean";
    return c;
  }
  if (variant == "-time") {
    c.use_time_encoding = false;
    c.mask_future = false;
    return c;
  }
  throw ConfigError("unknown ablation variant '" + variant + "'");
}

nlohmann::ordered_json config_diff(const RunConfig& base,
                                   const RunConfig& cfg) {
  nlohmann::ordered_json diff = nlohmann::ordered_json::object();
  const nlohmann::ordered_json a = base.to_json();
  const nlohmann::ordered_json b = cfg.to_json();
  for (auto it = b.begin(); it != b.end(); ++it) {
    if (a.at(it.key()) != it.value()) {
      diff[it.key()] = {{"base", a.at(it.key())}, {"variant", it.value()}};
    }
  }
  return diff;
}

}  // namespace tbdfs
