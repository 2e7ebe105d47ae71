#pragma once

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxsae/core/error.hpp"
#include "voxsae/io/binary.hpp"
#include "voxsae/tensor/matrix.hpp"

namespace voxsae::io {

inline constexpr std::uint32_t kSbemVersion = 1;
inline constexpr std::uint32_t kSbpxVersion = 1;

namespace detail {

inline void put_matrix_f32(ByteWriter& w, const Matrix& m, const std::string& what) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw InputError(what + ": refusing to write non-finite value");
    w.f32(static_cast<float>(v));
  }
}

inline Matrix get_matrix_f32(ByteReader& r, std::uint32_t rows, std::uint32_t cols, const std::string& what) {
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  r.need(n * 4);
  Matrix m(rows, cols);
  for (double& v : m.data()) {
    v = r.f32();
    if (!std::isfinite(v)) throw InputError(what + ": non-finite value in payload");
  }
  if (r.remaining() != 0) throw InputError(what + ": " + std::to_string(r.remaining()) + " trailing bytes");
  return m;
}

}  // namespace detail

/// Embedding file: "SBEM", u32 version, u32 T, u32 N, T*N float32 LE row-major.
inline std::vector<std::uint8_t> encode_sbem(const Matrix& frames) {
  if (frames.rows() == 0 || frames.cols() == 0) throw InputError("sbem: empty embedding sequence");
  ByteWriter w;
  w.bytes("SBEM", 4);
  w.u32(kSbemVersion);
  w.u32(static_cast<std::uint32_t>(frames.rows()));
  w.u32(static_cast<std::uint32_t>(frames.cols()));
  detail::put_matrix_f32(w, frames, "sbem");
  return w.data();
}

inline Matrix decode_sbem(const std::vector<std::uint8_t>& bytes, const std::string& what = "sbem") {
  ByteReader r(bytes, what);
  if (r.fixed(4) != "SBEM") throw InputError(what + ": bad magic");
  const auto version = r.u32();
  if (version != kSbemVersion) throw InputError(what + ": unsupported version " + std::to_string(version));
  const auto T = r.u32(), N = r.u32();
  if (T == 0 || N == 0) throw InputError(what + ": empty shape");
  return detail::get_matrix_f32(r, T, N, what);
}

inline void write_sbem(const std::filesystem::path& p, const Matrix& frames) { write_file_bytes(p, encode_sbem(frames)); }
inline Matrix read_sbem(const std::filesystem::path& p) { return decode_sbem(read_file_bytes(p), p.string()); }

/// Sidecar that maps SBPX rows to sample ids (JSON lines).
inline std::filesystem::path sbpx_sidecar(const std::filesystem::path& p) {
  return std::filesystem::path(p.string() + ".ids.jsonl");
}

struct PooledSet {
  Matrix vectors;                // count x N
  std::vector<std::string> ids;  // row -> sample id
};

/// Pooled file: "SBPX", u32 version, u32 count, u32 N, count*N float32 LE, plus sidecar.
inline void write_sbpx(const std::filesystem::path& p, const PooledSet& set) {
  if (set.ids.size() != set.vectors.rows()) throw DimensionError("sbpx: id count differs from row count");
  ByteWriter w;
  w.bytes("SBPX", 4);
  w.u32(kSbpxVersion);
  w.u32(static_cast<std::uint32_t>(set.vectors.rows()));
  w.u32(static_cast<std::uint32_t>(set.vectors.cols()));
  detail::put_matrix_f32(w, set.vectors, "sbpx");
  write_file_bytes(p, w.data());
  std::string side;
  for (std::size_t i = 0; i < set.ids.size(); ++i) {
    nlohmann::ordered_json j;
    j["row"] = i;
    j["id"] = set.ids[i];
    side += j.dump() + "\n";
  }
  write_file_text(sbpx_sidecar(p), side);
}

inline PooledSet read_sbpx(const std::filesystem::path& p) {
  const auto bytes = read_file_bytes(p);
  ByteReader r(bytes, p.string());
  if (r.fixed(4) != "SBPX") throw InputError(p.string() + ": bad magic");
  const auto version = r.u32();
  if (version != kSbpxVersion) throw InputError(p.string() + ": unsupported version " + std::to_string(version));
  const auto count = r.u32(), N = r.u32();
  PooledSet out;
  out.vectors = detail::get_matrix_f32(r, count, N, p.string());
  out.ids.assign(count, "");
  std::vector<bool> seen(count, false);
  std::istringstream side(read_file_text(sbpx_sidecar(p)));
  std::string line;
  while (std::getline(side, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("row") || !j.contains("id")) {
      throw InputError(p.string() + " sidecar: malformed line '" + line + "'");
    }
    const auto row = j["row"].get<std::size_t>();
    if (row >= count || seen[row]) throw InputError(p.string() + " sidecar: bad or duplicate row " + std::to_string(row));
    seen[row] = true;
    out.ids[row] = j["id"].get<std::string>();
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!seen[i]) throw InputError(p.string() + " sidecar: missing row " + std::to_string(i));
  }
  return out;
}

}  // namespace voxsae::io
