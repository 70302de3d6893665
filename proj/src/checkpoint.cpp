#include "tbdfs/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "tbdfs/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace tbdfs {

namespace {

constexpr char kMagic[4] = {'T', 'B', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError(path + ": truncated checkpoint");
  }
  return v;
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw DataError(path + ": truncated checkpoint");
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const RunConfig& config, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);

  out.write(kMagic, 4);
  write_u32(out, kVersion);

  nlohmann::ordered_json header;
  header["config"] = config.to_json();
  header["meta"] = {{"epoch", meta.epoch},
                    {"val_acc", meta.val_acc},
                    {"val_f1", meta.val_f1},
                    {"seed", meta.seed}};
  const std::string json = header.dump();
  write_u32(out, static_cast<std::uint32_t>(json.size()));
  out.write(json.data(), static_cast<std::streamsize>(json.size()));

  std::uint32_t count = 0;
  params.visit([&](const std::string&, const Tensor&) { ++count; });
  write_u32(out, count);
  params.visit([&](const std::string& name, const Tensor& t) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) write_u64(out, d);
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  });
  if (!out) throw DataError("short write while saving checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);

  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError(path + ": not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = read_u32(in, path);
  if (version != kVersion) {
    throw DataError(path + ": unsupported checkpoint version " +
                    std::to_string(version));
  }
  const std::uint32_t json_len = read_u32(in, path);
  std::string json_text(json_len, '\0');
  if (!in.read(json_text.data(), json_len)) {
    throw DataError(path + ": truncated checkpoint header");
  }
  const nlohmann::json header = nlohmann::json::parse(json_text);

  Checkpoint ck;
  ck.config = RunConfig::from_json(header.at("config"));
  ck.meta.epoch = header.at("meta").at("epoch").get<int>();
  ck.meta.val_acc = header.at("meta").at("val_acc").get<double>();
  ck.meta.val_f1 = header.at("meta").at("val_f1").get<double>();
  ck.meta.seed = header.at("meta").at("seed").get<std::uint64_t>();

  std::unordered_map<std::string, Tensor> blobs;
  const std::uint32_t count = read_u32(in, path);
  for (std::uint32_t b = 0; b < count; ++b) {
    const std::uint32_t name_len = read_u32(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw DataError(path + ": truncated blob name");
    }
    const std::uint32_t rank = read_u32(in, path);
    std::vector<std::size_t> shape(rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<std::size_t>(read_u64(in, path));
    }
    Tensor t = Tensor::zeros(shape);
    if (!in.read(reinterpret_cast<char*>(t.values.data()),
                 static_cast<std::streamsize>(t.values.size() *
                                              sizeof(double)))) {
      throw DataError(path + ": truncated blob payload for " + name);
    }
    blobs.emplace(std::move(name), std::move(t));
  }

  ck.params = ModelParams::init(ck.config.model(), ck.meta.seed);
  ck.params.visit([&](const std::string& name, Tensor& t) {
    auto it = blobs.find(name);
    if (it == blobs.end()) {
      throw DataError(path + ": checkpoint is missing parameter " + name);
    }
    if (it->second.shape != t.shape) {
      throw DataError(path + ": shape mismatch for " + name);
    }
    t = std::move(it->second);
  });
  return ck;
}

}  // namespace tbdfs
