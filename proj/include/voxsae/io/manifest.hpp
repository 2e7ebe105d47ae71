#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxsae/core/error.hpp"
#include "voxsae/core/metadata.hpp"
#include "voxsae/io/binary.hpp"

namespace voxsae::io {

enum class SampleKind { Embedding, Wav };

inline const char* to_string(SampleKind k) { return k == SampleKind::Wav ? "wav" : "embedding"; }
inline SampleKind parse_kind(const std::string& s) {
  if (s == "embedding") return SampleKind::Embedding;
  if (s == "wav") return SampleKind::Wav;
  throw InputError("kind must be embedding or wav, got '" + s + "'");
}

/// One manifest line. Beyond the required keys, optional "energy" (per-frame
/// energy trace, SBEM with N=1), "age", and "start_s"/"end_s" (chunk bounds
/// in seconds for wav input) are understood; any other keys are carried
/// through untouched.
struct ManifestEntry {
  SampleMeta meta;
  std::string path;
  SampleKind kind = SampleKind::Embedding;
  std::optional<std::string> energy;
  std::optional<double> age;
  std::optional<double> start_s;
  std::optional<double> end_s;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
  std::size_t size() const { return entries.size(); }
};

inline nlohmann::ordered_json to_json(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["id"] = e.meta.id;
  j["speaker"] = e.meta.speaker;
  j["label"] = to_string(e.meta.label);
  j["language"] = to_string(e.meta.language);
  j["sex"] = to_string(e.meta.sex);
  j["path"] = e.path;
  j["kind"] = to_string(e.kind);
  if (e.energy) j["energy"] = *e.energy;
  if (e.age) j["age"] = *e.age;
  if (e.start_s) j["start_s"] = *e.start_s;
  if (e.end_s) j["end_s"] = *e.end_s;
  for (const auto& [k, v] : e.extra.items()) j[k] = v;
  return j;
}

inline ManifestEntry entry_from_json(const nlohmann::ordered_json& j, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  auto req = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) throw InputError(where + ": missing string key '" + key + "'");
    return j[key].get<std::string>();
  };
  auto opt_num = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) throw InputError(where + ": key '" + key + "' must be numeric");
    return j[key].get<double>();
  };
  ManifestEntry e;
  try {
    e.meta.id = req("id");
    e.meta.speaker = req("speaker");
    e.meta.label = parse_label(req("label"));
    e.meta.language = parse_language(req("language"));
    e.meta.sex = parse_sex(req("sex"));
    e.path = req("path");
    e.kind = parse_kind(req("kind"));
  } catch (const InputError& err) {
    const std::string msg = err.what();
    throw InputError(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
  }
  if (j.contains("energy")) e.energy = req("energy");
  e.age = opt_num("age");
  e.start_s = opt_num("start_s");
  e.end_s = opt_num("end_s");
  static const std::set<std::string> known = {"id",   "speaker", "label", "language", "sex",    "path",
                                              "kind", "energy",  "age",   "start_s",  "end_s"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) e.extra[k] = v;
  }
  return e;
}

inline std::string dump_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += to_json(e).dump() + "\n";
  return out;
}

inline Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                               const std::string& name = "manifest") {
  Manifest m;
  m.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto j = nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InputError(where + ": invalid JSON");
    auto e = entry_from_json(j, where);
    if (!ids.insert(e.meta.id).second) throw InputError(where + ": duplicate id '" + e.meta.id + "'");
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw InputError(name + ": no entries");
  return m;
}

inline Manifest read_manifest(const std::filesystem::path& p) {
  return parse_manifest(read_file_text(p), p.parent_path(), p.string());
}

inline void write_manifest(const std::filesystem::path& p, const std::vector<ManifestEntry>& entries) {
  write_file_text(p, dump_manifest(entries));
}

/// Splits wav entries longer than max_s into consecutive chunks of at most
/// max_s seconds. `duration_of` returns a wav entry's duration in seconds.
template <class DurationFn>
std::vector<ManifestEntry> chunk_wav_entries(const std::vector<ManifestEntry>& entries, double max_s,
                                             DurationFn&& duration_of) {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.kind != SampleKind::Wav) {
      out.push_back(e);
      continue;
    }
    const double start = e.start_s.value_or(0.0);
    const double end = e.end_s ? *e.end_s : duration_of(e);
    if (end - start <= max_s) {
      out.push_back(e);
      continue;
    }
    std::size_t k = 0;
    for (double s = start; s < end - 1e-9; s += max_s, ++k) {
      ManifestEntry c = e;
      c.meta.id = e.meta.id + "#" + std::to_string(k);
      c.start_s = s;
      c.end_s = std::min(end, s + max_s);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace voxsae::io
