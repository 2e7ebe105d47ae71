#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/io/binary.hpp"

namespace voxsae::io {

/// Shortest round-trip decimal form of v.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

/// Parses a numeric cell; empty means missing.
inline std::optional<double> parse_cell(const std::string& s, const std::string& where) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InputError(where + ": not a number: '" + s + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw InputError("csv: missing column '" + name + "'");
  }
  bool has_column(const std::string& name) const {
    for (const auto& h : header) {
      if (h == name) return true;
    }
    return false;
  }
};

inline CsvTable parse_csv(const std::string& text, const std::string& name = "csv") {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      std::map<std::string, int> seen;
      for (const auto& h : t.header) {
        if (seen[h]++) throw InputError(name + ": duplicate column '" + h + "'");
      }
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InputError(name + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                       " fields, got " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw InputError(name + ": empty file");
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& p) { return parse_csv(read_file_text(p), p.string()); }

/// Row-at-a-time CSV text builder.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) : n_(header.size()) { row_strings(header); }

  void row_strings(const std::vector<std::string>& cells) {
    if (cells.size() != n_) throw DimensionError("csv: row has " + std::to_string(cells.size()) + " cells, header has " + std::to_string(n_));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_escape(cells[i]);
    }
    text_ += '\n';
  }
  const std::string& str() const { return text_; }
  void save(const std::filesystem::path& p) const { write_file_text(p, text_); }

 private:
  std::size_t n_;
  std::string text_;
};

}  // namespace voxsae::io
