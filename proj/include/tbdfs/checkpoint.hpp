#pragma once

#include <cstdint>
#include <string>

#include "tbdfs/config.hpp"
#include "tbdfs/model.hpp"

namespace tbdfs {

struct CheckpointMeta {
  int epoch = -1;
  double val_acc = 0.0;
  double val_f1 = 0.0;
  std::uint64_t seed = 0;
};

struct Checkpoint {
  ModelParams params;
  RunConfig config;
  CheckpointMeta meta;
};

// Binary format, little-endian: magic "TBDF", u32 version, u32 json length,
// config+meta JSON, u32 blob count, then per blob: u32 name length, name,
// u32 rank, u64 dims, f64 payload. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const RunConfig& config, const CheckpointMeta& meta);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace tbdfs
