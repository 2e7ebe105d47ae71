#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxsae/core/error.hpp"
#include "voxsae/io/binary.hpp"
#include "voxsae/tensor/matrix.hpp"

namespace voxsae::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Matrix value;
};

/// Named-tensor checkpoint.
///
/// Layout (little-endian):
///   "VXCK" u32 version u32 n_tensors
///   per tensor: u32 name_len, name, u32 rows, u32 cols, rows*cols float32
///   u32 config_len, config JSON (UTF-8)
///   u64 checksum = FNV-1a 64 over every preceding byte
struct Checkpoint {
  std::vector<NamedTensor> tensors;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();

  const Matrix& get(const std::string& name) const {
    for (const auto& t : tensors) {
      if (t.name == name) return t.value;
    }
    throw InputError("checkpoint: no tensor named '" + name + "'");
  }
};

inline std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  ByteWriter w;
  w.bytes("VXCK", 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& t : ck.tensors) {
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.value.rows()));
    w.u32(static_cast<std::uint32_t>(t.value.cols()));
    for (double v : t.value.data()) {
      if (!std::isfinite(v)) throw NumericError("checkpoint: tensor '" + t.name + "' is not finite");
      w.f32(static_cast<float>(v));
    }
  }
  w.str(ck.config.dump());
  const auto& bytes = w.data();
  w.u64(fnv1a64(bytes.data(), bytes.size()));
  return w.data();
}

inline std::uint64_t checkpoint_checksum(const std::vector<std::uint8_t>& encoded) {
  if (encoded.size() < 8) throw InputError("checkpoint: too short");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(encoded[encoded.size() - 8 + i]) << (8 * i);
  return v;
}

inline Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& what = "checkpoint") {
  if (bytes.size() < 8) throw InputError(what + ": truncated");
  const std::uint64_t stored = checkpoint_checksum(bytes);
  if (fnv1a64(bytes.data(), bytes.size() - 8) != stored) throw InputError(what + ": checksum mismatch");
  ByteReader r(bytes, what);
  if (r.fixed(4) != "VXCK") throw InputError(what + ": bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion) throw InputError(what + ": unsupported version " + std::to_string(version));
  Checkpoint ck;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    NamedTensor t;
    t.name = r.str();
    const auto rows = r.u32(), cols = r.u32();
    r.need(static_cast<std::size_t>(rows) * cols * 4);
    t.value = Matrix(rows, cols);
    for (double& v : t.value.data()) v = r.f32();
    ck.tensors.push_back(std::move(t));
  }
  const auto cfg = nlohmann::ordered_json::parse(r.str(), nullptr, false);
  if (cfg.is_discarded()) throw InputError(what + ": config block is not JSON");
  ck.config = cfg;
  if (r.remaining() != 8) throw InputError(what + ": unexpected trailing bytes");
  return ck;
}

inline std::uint64_t write_checkpoint(const std::filesystem::path& p, const Checkpoint& ck) {
  const auto bytes = encode_checkpoint(ck);
  write_file_bytes(p, bytes);
  return checkpoint_checksum(bytes);
}

inline Checkpoint read_checkpoint(const std::filesystem::path& p) {
  return decode_checkpoint(read_file_bytes(p), p.string());
}

}  // namespace voxsae::io
