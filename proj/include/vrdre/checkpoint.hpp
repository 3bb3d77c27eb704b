#pragma once

#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrdre/errors.hpp"
#include "vrdre/param.hpp"

namespace vrdre {

// Checkpoint archive: magic, format version, config-echo JSON, then named
// tensors as row-major 64-bit little-endian floats.
//
//   bytes 0..7   "VRDRECK1"
//   u32          format version (1)
//   u64 + bytes  config JSON
//   u64          tensor count
//   per tensor:  u32 name length, name bytes, u64 rows, u64 cols, payload
inline constexpr char kCheckpointMagic[8] = {'V', 'R', 'D', 'R',
                                             'E', 'C', 'K', '1'};
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw SchemaError("truncated checkpoint");
  return v;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path,
                            const nlohmann::json& config_echo,
                            const std::vector<const Param*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 8);
  detail::write_pod<uint32_t>(out, kCheckpointVersion);
  const std::string cfg = config_echo.dump();
  detail::write_pod<uint64_t>(out, cfg.size());
  out.write(cfg.data(), std::streamsize(cfg.size()));
  detail::write_pod<uint64_t>(out, params.size());
  for (const Param* p : params) {
    detail::write_pod<uint32_t>(out, uint32_t(p->name.size()));
    out.write(p->name.data(), std::streamsize(p->name.size()));
    detail::write_pod<uint64_t>(out, uint64_t(p->v.rows()));
    detail::write_pod<uint64_t>(out, uint64_t(p->v.cols()));
    for (Eigen::Index r = 0; r < p->v.rows(); ++r)
      for (Eigen::Index c = 0; c < p->v.cols(); ++c)
        detail::write_pod<double>(out, p->v(r, c));
  }
  if (!out) throw InputError("checkpoint write failed: " + path);
}

struct LoadedCheckpoint {
  nlohmann::json config_echo;
  std::map<std::string, Matrix> tensors;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw SchemaError("not a checkpoint file: " + path);
  const auto version = detail::read_pod<uint32_t>(in);
  if (version != kCheckpointVersion)
    throw SchemaError("unsupported checkpoint version");
  const auto cfg_len = detail::read_pod<uint64_t>(in);
  std::string cfg(cfg_len, '\0');
  in.read(cfg.data(), std::streamsize(cfg_len));
  if (!in) throw SchemaError("truncated checkpoint");
  LoadedCheckpoint ck;
  ck.config_echo = nlohmann::json::parse(cfg);
  const auto count = detail::read_pod<uint64_t>(in);
  for (uint64_t k = 0; k < count; ++k) {
    const auto name_len = detail::read_pod<uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), std::streamsize(name_len));
    const auto rows = detail::read_pod<uint64_t>(in);
    const auto cols = detail::read_pod<uint64_t>(in);
    Matrix m(rows, cols);
    for (uint64_t r = 0; r < rows; ++r)
      for (uint64_t c = 0; c < cols; ++c)
        m(Eigen::Index(r), Eigen::Index(c)) = detail::read_pod<double>(in);
    ck.tensors.emplace(std::move(name), std::move(m));
  }
  return ck;
}

}  // namespace vrdre
