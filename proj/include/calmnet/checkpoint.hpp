#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "calmnet/tensor.hpp"

namespace calmnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

inline constexpr char kCheckpointMagic[4] = {'C', 'A', 'L', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Flat binary checkpoint: magic "CALM", version u32, then one record per
/// tensor until end of file: name length u32, name bytes, shape rank u32,
/// shape dims u64 each, row-major f64 payload. All integers little-endian.
inline void save_checkpoint(const std::filesystem::path& path,
                            const std::vector<const Parameter*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  out.write(kCheckpointMagic, 4);
  const std::uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  for (const Parameter* p : params) {
    const auto name_len = static_cast<std::uint32_t>(p->name.size());
    out.write(reinterpret_cast<const char*>(&name_len), 4);
    out.write(p->name.data(), name_len);
    const auto rank = static_cast<std::uint32_t>(p->value.rank());
    out.write(reinterpret_cast<const char*>(&rank), 4);
    for (std::size_t d : p->value.shape) {
      const auto dim = static_cast<std::uint64_t>(d);
      out.write(reinterpret_cast<const char*>(&dim), 8);
    }
    out.write(reinterpret_cast<const char*>(p->value.data.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("short write to checkpoint '" + path.string() + "'");
}

inline std::map<std::string, Tensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kCheckpointMagic, 4))
    throw std::runtime_error("'" + path.string() + "' is not a checkpoint file");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (!in || version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  std::map<std::string, Tensor> tensors;
  while (true) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), 4);
    if (in.eof()) break;
    if (!in) throw std::runtime_error("truncated checkpoint '" + path.string() + "'");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), 4);
    std::vector<std::size_t> shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i) {
      std::uint64_t dim = 0;
      in.read(reinterpret_cast<char*>(&dim), 8);
      shape[i] = static_cast<std::size_t>(dim);
    }
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint '" + path.string() + "'");
    tensors.emplace(std::move(name), std::move(t));
  }
  return tensors;
}

/// Restores named tensors into matching parameters; unknown or missing names
/// and shape mismatches are errors.
inline void restore_parameters(const std::map<std::string, Tensor>& tensors,
                               const std::vector<Parameter*>& params) {
  if (tensors.size() != params.size())
    throw std::runtime_error("checkpoint holds " + std::to_string(tensors.size()) +
                             " tensors, model expects " + std::to_string(params.size()));
  for (Parameter* p : params) {
    const auto it = tensors.find(p->name);
    if (it == tensors.end())
      throw std::runtime_error("checkpoint is missing tensor '" + p->name + "'");
    if (it->second.shape != p->value.shape)
      throw std::runtime_error("tensor '" + p->name + "' has shape " +
                               it->second.shape_str() + ", model expects " +
                               p->value.shape_str());
    p->value = it->second;
  }
}

}  // namespace calmnet
