#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "tbdfs/model.hpp"

namespace tbdfs {

// Everything a run needs, flag- and file-configurable. Defaults follow the
// training setup this engine targets: Adam(1e-4, 0.9, 0.999), dropout 0.1,
// batch 200, two layers.
struct RunConfig {
  // model
  int d = 8;
  int layers = 2;
  int heads = 1;
  int fanout = 20;
  double alpha = 0.5;
  double dropout = 0.1;
  bool use_time_encoding = true;
  bool mask_future = true;
  std::string path_agg = "attention";     // attention | uniform
  std::string paths_agg = "attention";    // attention | mean
  std::string fanout_policy = "recent";   // recent | uniform
  std::uint64_t max_paths = 0;

  // optimization
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.0;
  int batch_size = 200;
  int epochs = 10;
  int patience = 5;
  std::uint64_t seed = 1;

  // data handling
  double train_frac = 0.70;
  double val_frac = 0.15;
  int threads = 1;

  ModelConfig model() const;
  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

// Named single-component modifications for the ablation table.
RunConfig apply_variant(const RunConfig& base, const std::string& variant);

// Fields where `cfg` departs from `base` (the ablation audit).
nlohmann::ordered_json config_diff(const RunConfig& base,
                                   const RunConfig& cfg);

}  // namespace tbdfs
